#pragma once

// Seeded synthetic corpora and QA sets.

#include <cstdint>
#include <random>
#include <string>
#include <vector>

#include "ragbench/corpus.hpp"
#include "ragbench/metrics.hpp"

namespace ragbench::testing {

class WordGen {
 public:
  explicit WordGen(std::uint64_t seed) : rng_(seed) {}

  std::string word(int min_syllables = 2, int max_syllables = 4) {
    static constexpr char kCons[] = "bcdfghjklmnprstvwz";
    static constexpr char kVow[] = "aeiou";
    std::uniform_int_distribution<int> syl(min_syllables, max_syllables);
    std::string w;
    for (int i = syl(rng_); i > 0; --i) {
      w.push_back(kCons[pick(sizeof(kCons) - 1)]);
      w.push_back(kVow[pick(sizeof(kVow) - 1)]);
    }
    return w;
  }

  /// Lowercase letters only, exactly n long.
  std::string word_of_length(std::size_t n) {
    std::string w;
    while (w.size() < n) w += word(1, 1);
    w.resize(n);
    return w;
  }

  std::string sentence(int n_words) {
    std::string s;
    for (int i = 0; i < n_words; ++i) {
      if (i) s.push_back(' ');
      s += word();
    }
    s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s + ".";
  }

  /// A sentence of exactly `len` characters (>= 8), ending in '.'.
  std::string sentence_of_length(std::size_t len) {
    std::string s;
    for (;;) {
      const auto w = word();
      const auto cand = s.empty() ? w : s + " " + w;
      if (cand.size() + 1 + 4 > len) break;
      s = cand;
    }
    const std::size_t remaining = len - 1 - s.size();  // room before '.'
    if (s.empty()) {
      s = word_of_length(remaining);
    } else {
      s += " " + word_of_length(remaining - 1);
    }
    s[0] = static_cast<char>(s[0] - 'a' + 'A');
    return s + ".";
  }

  std::string paragraph(std::size_t min_chars) {
    std::string p;
    while (p.size() < min_chars) {
      if (!p.empty()) p.push_back(' ');
      p += sentence(6 + pick(8));
    }
    return p;
  }

  std::size_t pick(std::size_t n) { return std::uniform_int_distribution<std::size_t>(0, n - 1)(rng_); }
  std::mt19937_64& rng() { return rng_; }

 private:
  std::mt19937_64 rng_;
};

/// Question built from distinctive words of the ground truth.
inline std::string question_for(const std::string& ground_truth) {
  std::vector<std::string> words;
  std::string cur;
  for (char c : ground_truth) {
    if (std::isalpha(static_cast<unsigned char>(c))) {
      cur.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(c))));
    } else if (!cur.empty()) {
      words.push_back(cur);
      cur.clear();
    }
  }
  if (!cur.empty()) words.push_back(cur);
  std::string q = "What is known about";
  for (std::size_t i = 0; i < words.size(); i += std::max<std::size_t>(1, words.size() / 6)) {
    q += " " + words[i];
  }
  return q + "?";
}

struct PlantedSet {
  std::vector<corpus::Document> good;       // every ground truth appears verbatim
  std::vector<corpus::Document> unrelated;  // disjoint vocabulary
  std::vector<metrics::QAItem> qa;
};

inline corpus::Document make_doc(std::string id, std::string body) {
  corpus::Document d;
  d.id = id;
  d.source = "synthetic";
  d.body = std::move(body);
  return d;
}

/// One short document per QA item holding its ground truth (2-3 sentences)
/// verbatim, plus an equally sized corpus of unrelated prose.
inline PlantedSet planted_short(std::size_t n_items, std::uint64_t seed) {
  WordGen truth(seed), noise(seed ^ 0x9e3779b97f4a7c15ULL);
  PlantedSet set;
  for (std::size_t i = 0; i < n_items; ++i) {
    std::string gt = truth.sentence(7) + " " + truth.sentence(7);
    if (i % 2 == 0) gt += " " + truth.sentence(6);
    const auto id = "q" + std::to_string(100 + i);
    set.qa.push_back({id, question_for(gt), gt});
    set.good.push_back(make_doc("good-" + std::to_string(100 + i), gt));
    set.unrelated.push_back(make_doc("other-" + std::to_string(100 + i), noise.paragraph(gt.size())));
  }
  return set;
}

inline constexpr std::size_t kSpanLength = 300;
inline constexpr std::size_t kSpanOffset = 100;

/// Documents of 600 characters: 100 filler, a 300-character ground-truth
/// span (three sentences of 99, 99 and 100), then 200 filler. At chunk size
/// 250 (overlap 0) every span straddles the boundary at 250; at 500 and up
/// the span sits whole inside the first chunk.
inline PlantedSet planted_spans(std::size_t n_items, std::uint64_t seed) {
  WordGen truth(seed), noise(seed ^ 0x51ed2701ULL);
  PlantedSet set;
  for (std::size_t i = 0; i < n_items; ++i) {
    const std::string gt =
        truth.sentence_of_length(99) + " " + truth.sentence_of_length(99) + " " + truth.sentence_of_length(100);
    const std::string body =
        noise.sentence_of_length(kSpanOffset - 1) + " " + gt + " " + noise.sentence_of_length(199);
    const auto id = "s" + std::to_string(100 + i);
    set.qa.push_back({id, question_for(gt), gt});
    set.good.push_back(make_doc("span-" + std::to_string(100 + i), body));
    set.unrelated.push_back(make_doc("other-" + std::to_string(100 + i), noise.paragraph(body.size())));
  }
  return set;
}

/// A corpus of `n_docs` documents of widely varying length (some longer
/// than the largest default chunk size) with `n_items` ground truths
/// embedded somewhere inside the first n_items documents.
inline PlantedSet mixed_corpus(std::size_t n_docs, std::size_t n_items, std::uint64_t seed) {
  WordGen truth(seed), noise(seed + 17);
  PlantedSet set;
  static constexpr std::size_t kLengths[] = {180, 600, 1500, 3000, 9000, 400, 12000, 900};
  for (std::size_t i = 0; i < n_docs; ++i) {
    const auto len = kLengths[i % std::size(kLengths)];
    std::string body = noise.paragraph(len / 2);
    const auto id = "doc-" + std::to_string(1000 + i);
    if (i < n_items) {
      const std::string gt = truth.sentence(8) + " " + truth.sentence(6);
      body += " " + gt + " ";
      set.qa.push_back({"m" + std::to_string(100 + i), question_for(gt), gt});
    } else {
      body += " ";
    }
    body += noise.paragraph(len / 2);
    set.good.push_back(make_doc(id, body));
  }
  return set;
}

}  // namespace ragbench::testing
