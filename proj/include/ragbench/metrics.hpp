#pragma once

// Answer correctness: statement-level factual F1 against the ground truth,
// blended with embedding similarity.
//
//   correctness = w_factual * F1 + w_semantic * clamp(cosine(answer, truth), 0, 1)
//   F1          = tp / (tp + (fp + fn) / 2)

#include <algorithm>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <memory>
#include <set>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "ragbench/embed.hpp"
#include "ragbench/error.hpp"
#include "ragbench/llm.hpp"
#include "ragbench/utf8.hpp"

namespace ragbench::metrics {

struct QAItem {
  std::string id;
  std::string question;
  std::string ground_truth;

  friend bool operator==(const QAItem&, const QAItem&) = default;
};

struct EvalResult {
  std::string qa_id;
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;
  double f1 = 0.0;
  double semantic_sim = 0.0;
  double answer_correctness = 0.0;

  friend bool operator==(const EvalResult&, const EvalResult&) = default;
};

enum class JudgeKind { kLexical, kRemote };

struct MetricConfig {
  double w_factual = 0.75;
  double w_semantic = 0.25;
  JudgeKind judge = JudgeKind::kLexical;
  double jaccard_threshold = 0.6;

  void validate() const {
    if (!(w_factual >= 0.0) || !(w_semantic >= 0.0)) {
      throw Error(ErrorCode::kInvalidConfig, "metric weights must be >= 0");
    }
    if (std::abs(w_factual + w_semantic - 1.0) > 1e-9) {
      throw Error(ErrorCode::kInvalidConfig, "metric weights must sum to 1");
    }
    if (!(jaccard_threshold >= 0.0 && jaccard_threshold <= 1.0)) {
      throw Error(ErrorCode::kInvalidConfig, "jaccard_threshold must lie in [0, 1]");
    }
  }
};

struct Counts {
  std::size_t tp = 0;
  std::size_t fp = 0;
  std::size_t fn = 0;

  friend bool operator==(const Counts&, const Counts&) = default;
};

// ---------------------------------------------------------------------------
// Lexical primitives
// ---------------------------------------------------------------------------

/// Splits after every run of [.?!] that is followed by whitespace or the end
/// of text. Terminators are dropped; pieces are trimmed; empties dropped.
inline std::vector<std::string> split_statements(std::string_view text) {
  std::vector<std::string> out;
  const auto cps = utf8::decode(text);
  std::vector<char32_t> current;
  auto flush = [&] {
    auto first = std::find_if_not(current.begin(), current.end(), utf8::is_space);
    auto last = std::find_if_not(current.rbegin(), current.rend(), utf8::is_space).base();
    if (first < last) out.push_back(utf8::encode(std::vector<char32_t>(first, last)));
    current.clear();
  };
  auto is_term = [](char32_t c) { return c == U'.' || c == U'?' || c == U'!'; };
  for (std::size_t i = 0; i < cps.size();) {
    if (is_term(cps[i])) {
      std::size_t j = i;
      while (j < cps.size() && is_term(cps[j])) ++j;
      if (j == cps.size() || utf8::is_space(cps[j])) {
        flush();
      } else {
        current.insert(current.end(), cps.begin() + static_cast<std::ptrdiff_t>(i),
                       cps.begin() + static_cast<std::ptrdiff_t>(j));
      }
      i = j;
    } else {
      current.push_back(cps[i++]);
    }
  }
  flush();
  return out;
}

/// Case-folded word tokens (maximal runs of word characters).
inline std::set<std::string> token_set(std::string_view text) {
  std::set<std::string> tokens;
  std::string cur;
  for (char32_t cp : utf8::decode(text)) {
    if (utf8::is_word(cp)) {
      utf8::append(cur, utf8::fold(cp));
    } else if (!cur.empty()) {
      tokens.insert(std::move(cur));
      cur.clear();
    }
  }
  if (!cur.empty()) tokens.insert(std::move(cur));
  return tokens;
}

inline double jaccard(const std::set<std::string>& a, const std::set<std::string>& b) {
  if (a.empty() && b.empty()) return 0.0;
  std::size_t inter = 0;
  for (const auto& t : a) inter += b.count(t);
  return static_cast<double>(inter) / static_cast<double>(a.size() + b.size() - inter);
}

// ---------------------------------------------------------------------------
// Judges
// ---------------------------------------------------------------------------

class Judge {
 public:
  virtual ~Judge() = default;
  virtual std::vector<std::string> extract_statements(std::string_view text) = 0;
  virtual Counts classify(const std::vector<std::string>& answer_stmts,
                          const std::vector<std::string>& gt_stmts) = 0;
};

/// "Supports" = Jaccard of token sets >= threshold; pairs are judged
/// independently, so one statement may support several.
class LexicalJudge final : public Judge {
 public:
  explicit LexicalJudge(double threshold = 0.6) : threshold_(threshold) {}

  std::vector<std::string> extract_statements(std::string_view text) override {
    return split_statements(text);
  }

  Counts classify(const std::vector<std::string>& answer_stmts,
                  const std::vector<std::string>& gt_stmts) override {
    std::vector<std::set<std::string>> a_tok, g_tok;
    for (const auto& s : answer_stmts) a_tok.push_back(token_set(s));
    for (const auto& s : gt_stmts) g_tok.push_back(token_set(s));

    std::vector<bool> gt_hit(gt_stmts.size(), false);
    Counts c;
    for (std::size_t i = 0; i < answer_stmts.size(); ++i) {
      bool supported = false;
      for (std::size_t j = 0; j < gt_stmts.size(); ++j) {
        if (supports(answer_stmts[i], a_tok[i], gt_stmts[j], g_tok[j])) {
          supported = true;
          gt_hit[j] = true;
        }
      }
      ++(supported ? c.tp : c.fp);
    }
    c.fn = static_cast<std::size_t>(std::count(gt_hit.begin(), gt_hit.end(), false));
    return c;
  }

 private:
  bool supports(const std::string& a, const std::set<std::string>& at, const std::string& g,
                const std::set<std::string>& gt) const {
    // Token-free statements ("---") only match themselves.
    if (at.empty() && gt.empty()) return utf8::case_fold(a) == utf8::case_fold(g);
    return jaccard(at, gt) >= threshold_;
  }

  double threshold_;
};

inline constexpr std::string_view kExtractPrompt =
    "Break the following text into a list of short, self-contained factual statements. "
    "Reply with only a JSON array of strings and nothing else.\n\nText:\n";

inline constexpr std::string_view kClassifyPrompt =
    "You compare an ANSWER against a GROUND TRUTH, both given as lists of statements.\n"
    "For each answer statement decide whether it is supported by the ground truth. "
    "For each ground-truth statement decide whether it is covered by the answer.\n"
    "Reply with only a JSON object of the form "
    "{\"answer\": [true|false, ...], \"ground_truth\": [true|false, ...]} "
    "with one boolean per statement, in order.\n\n";

/// Strips a surrounding ``` fence if the model wrapped its JSON in one.
inline std::string_view strip_code_fence(std::string_view s) {
  auto trim = [](std::string_view v) {
    const auto first = v.find_first_not_of(" \t\r\n");
    if (first == std::string_view::npos) return std::string_view{};
    return v.substr(first, v.find_last_not_of(" \t\r\n") - first + 1);
  };
  s = trim(s);
  if (s.starts_with("```")) {
    const auto nl = s.find('\n');
    s = nl == std::string_view::npos ? std::string_view{} : s.substr(nl + 1);
    if (const auto end = s.rfind("```"); end != std::string_view::npos) s = s.substr(0, end);
  }
  return trim(s);
}

/// Delegates both steps to a chat model with fixed prompts.
class RemoteJudge final : public Judge {
 public:
  RemoteJudge(std::shared_ptr<llm::Generator> generator, std::string model)
      : generator_(std::move(generator)), model_(std::move(model)) {}

  std::vector<std::string> extract_statements(std::string_view text) override {
    if (text.find_first_not_of(" \t\r\n") == std::string_view::npos) return {};
    const auto reply = ask(std::string(kExtractPrompt) + std::string(text));
    try {
      const auto j = nlohmann::json::parse(strip_code_fence(reply));
      if (!j.is_array()) throw std::invalid_argument("reply is not a JSON array");
      std::vector<std::string> out;
      for (const auto& item : j) {
        auto str = item.get<std::string>();
        if (!str.empty()) out.push_back(std::move(str));
      }
      return out;
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kProtocolError, std::string("judge returned unparseable statements: ") + e.what());
    }
  }

  Counts classify(const std::vector<std::string>& answer_stmts,
                  const std::vector<std::string>& gt_stmts) override {
    if (answer_stmts.empty() || gt_stmts.empty()) return {0, answer_stmts.size(), gt_stmts.size()};
    nlohmann::json payload{{"answer", answer_stmts}, {"ground_truth", gt_stmts}};
    const auto reply = ask(std::string(kClassifyPrompt) + payload.dump(2));
    std::vector<bool> a_labels, g_labels;
    try {
      const auto j = nlohmann::json::parse(strip_code_fence(reply));
      a_labels = j.at("answer").get<std::vector<bool>>();
      g_labels = j.at("ground_truth").get<std::vector<bool>>();
    } catch (const std::exception& e) {
      throw Error(ErrorCode::kProtocolError, std::string("judge returned unparseable labels: ") + e.what());
    }
    if (a_labels.size() != answer_stmts.size() || g_labels.size() != gt_stmts.size()) {
      throw Error(ErrorCode::kProtocolError, "judge label count does not match statement count");
    }
    Counts c;
    c.tp = static_cast<std::size_t>(std::count(a_labels.begin(), a_labels.end(), true));
    c.fp = a_labels.size() - c.tp;
    c.fn = static_cast<std::size_t>(std::count(g_labels.begin(), g_labels.end(), false));
    return c;
  }

 private:
  std::string ask(std::string prompt) {
    llm::ChatRequest req;
    req.model = model_;
    req.messages.push_back({llm::Role::kUser, std::move(prompt)});
    return generator_->generate(req).content;
  }

  std::shared_ptr<llm::Generator> generator_;
  std::string model_;
};

// ---------------------------------------------------------------------------
// Scores
// ---------------------------------------------------------------------------

inline double f1(std::size_t tp, std::size_t fp, std::size_t fn) {
  if (tp == 0 && fp == 0 && fn == 0) {
    throw Error(ErrorCode::kMetricUndefined, "no statements on either side (tp = fp = fn = 0)");
  }
  return static_cast<double>(tp) /
         (static_cast<double>(tp) + 0.5 * static_cast<double>(fp + fn));
}

inline double blend(double factual, double semantic, const MetricConfig& cfg) {
  return cfg.w_factual * factual + cfg.w_semantic * semantic;
}

inline EvalResult answer_correctness(std::string_view answer, const QAItem& qa, Judge& judge,
                                     embed::Embedder& embedder, const MetricConfig& cfg) {
  try {
    cfg.validate();
    if (qa.ground_truth.empty()) throw Error(ErrorCode::kInvalidConfig, "ground truth is empty");

    EvalResult r;
    r.qa_id = qa.id;
    const auto counts = judge.classify(judge.extract_statements(answer),
                                       judge.extract_statements(qa.ground_truth));
    r.tp = counts.tp;
    r.fp = counts.fp;
    r.fn = counts.fn;
    r.f1 = f1(r.tp, r.fp, r.fn);

    const bool blank = answer.find_first_not_of(" \t\r\n") == std::string_view::npos;
    if (!blank) {
      const std::vector<std::string> texts{std::string(answer), qa.ground_truth};
      const auto v = embedder.embed(texts);
      r.semantic_sim = std::clamp(embed::cosine(v[0], v[1]), 0.0, 1.0);
    }
    r.answer_correctness = std::clamp(blend(r.f1, r.semantic_sim, cfg), 0.0, 1.0);
    return r;
  } catch (const Error& e) {
    rethrow_with_context(e, "qa " + qa.id);
  }
}

struct Summary {
  double mean = 0.0;
  std::size_t n = 0;
  double min = 0.0;
  double max = 0.0;

  friend bool operator==(const Summary&, const Summary&) = default;
};

/// Mean of answer_correctness, folded in qa_id order.
inline Summary aggregate(std::vector<EvalResult> results) {
  if (results.empty()) throw Error(ErrorCode::kEmptyResults, "no results to aggregate");
  std::stable_sort(results.begin(), results.end(),
                   [](const EvalResult& a, const EvalResult& b) { return a.qa_id < b.qa_id; });
  Summary s;
  s.n = results.size();
  s.min = s.max = results.front().answer_correctness;
  double sum = 0.0;
  for (const auto& r : results) {
    sum += r.answer_correctness;
    s.min = std::min(s.min, r.answer_correctness);
    s.max = std::max(s.max, r.answer_correctness);
  }
  s.mean = sum / static_cast<double>(s.n);
  return s;
}

// ---------------------------------------------------------------------------
// I/O
// ---------------------------------------------------------------------------

inline std::vector<QAItem> read_qa_set(std::istream& in) {
  std::vector<QAItem> items;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      QAItem item{j.at("id").get<std::string>(), j.at("question").get<std::string>(),
                  j.at("ground_truth").get<std::string>()};
      if (item.id.empty()) throw std::invalid_argument("empty id");
      if (item.question.empty()) throw std::invalid_argument("empty question");
      if (item.ground_truth.empty()) throw std::invalid_argument("empty ground_truth");
      if (!ids.insert(item.id).second) throw std::invalid_argument("duplicate id '" + item.id + "'");
      items.push_back(std::move(item));
    } catch (const std::exception& e) {
      throw MalformedLineError(line_no, e.what());
    }
  }
  if (items.empty()) throw Error(ErrorCode::kEmptyCorpus, "QA set is empty");
  return items;
}

inline std::vector<QAItem> load_qa_set(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kPathNotFound, "cannot open QA set " + path.string());
  return read_qa_set(in);
}

inline nlohmann::ordered_json to_json(const QAItem& q) {
  nlohmann::ordered_json j;
  j["id"] = q.id;
  j["question"] = q.question;
  j["ground_truth"] = q.ground_truth;
  return j;
}

inline nlohmann::ordered_json to_json(const EvalResult& r) {
  nlohmann::ordered_json j;
  j["qa_id"] = r.qa_id;
  j["tp"] = r.tp;
  j["fp"] = r.fp;
  j["fn"] = r.fn;
  j["f1"] = r.f1;
  j["semantic_sim"] = r.semantic_sim;
  j["answer_correctness"] = r.answer_correctness;
  return j;
}

inline EvalResult eval_result_from_json(const nlohmann::json& j) {
  return {j.at("qa_id").get<std::string>(),  j.at("tp").get<std::size_t>(),
          j.at("fp").get<std::size_t>(),     j.at("fn").get<std::size_t>(),
          j.at("f1").get<double>(),          j.at("semantic_sim").get<double>(),
          j.at("answer_correctness").get<double>()};
}

inline nlohmann::ordered_json to_json(const Summary& s) {
  nlohmann::ordered_json j;
  j["mean"] = s.mean;
  j["n"] = s.n;
  j["min"] = s.min;
  j["max"] = s.max;
  return j;
}

}  // namespace ragbench::metrics
