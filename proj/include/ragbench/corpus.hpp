#pragma once

// Corpus ingestion: Reddit-style JSONL exports and text/markdown directory
// trees, normalized into a flat list of Documents.

#include <algorithm>
#include <cstdint>
#include <filesystem>
#include <fstream>
#include <istream>
#include <ostream>
#include <sstream>
#include <string>
#include <unordered_set>
#include <utility>
#include <vector>

#include <nlohmann/json.hpp>

#include "ragbench/error.hpp"
#include "ragbench/utf8.hpp"

namespace ragbench::corpus {

struct Document {
  std::string id;
  std::string source;
  std::string title;
  std::string body;
  std::int64_t score = 0;
  std::int64_t created_at = 0;

  friend bool operator==(const Document&, const Document&) = default;
};

/// documents_in counts every non-blank input line (or file). After dedup,
/// documents_kept + duplicates_removed + lines_skipped == documents_in.
struct CorpusStats {
  std::size_t documents_in = 0;
  std::size_t documents_kept = 0;
  std::size_t duplicates_removed = 0;
  std::size_t lines_skipped = 0;

  friend bool operator==(const CorpusStats&, const CorpusStats&) = default;
};

/// CRLF/CR to LF, then strip leading and trailing whitespace.
inline std::string normalize_text(std::string_view raw) {
  std::string s;
  s.reserve(raw.size());
  for (std::size_t i = 0; i < raw.size(); ++i) {
    if (raw[i] == '\r') {
      s.push_back('\n');
      if (i + 1 < raw.size() && raw[i + 1] == '\n') ++i;
    } else {
      s.push_back(raw[i]);
    }
  }
  auto is_ws = [](char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\v' || c == '\f'; };
  const auto first = std::find_if_not(s.begin(), s.end(), is_ws);
  const auto last = std::find_if_not(s.rbegin(), s.rend(), is_ws).base();
  return first < last ? std::string(first, last) : std::string();
}

/// title, selftext and top answer joined by blank lines, empty parts elided.
inline std::string compose_body(std::string_view title, std::string_view selftext,
                                std::string_view top_comment) {
  std::string body;
  for (std::string_view part : {title, selftext, top_comment}) {
    std::string norm = normalize_text(part);
    if (norm.empty()) continue;
    if (!body.empty()) body += "\n\n";
    body += norm;
  }
  return body;
}

namespace detail {

inline std::string text_field(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return {};
  if (!it->is_string()) throw std::invalid_argument(std::string("field '") + key + "' is not a string");
  return it->get<std::string>();
}

inline std::int64_t int_field(const nlohmann::json& obj, const char* key) {
  auto it = obj.find(key);
  if (it == obj.end() || it->is_null()) return 0;
  if (it->is_number_integer()) return it->get<std::int64_t>();
  // Exports often carry created_utc as a float.
  if (it->is_number_float()) return static_cast<std::int64_t>(it->get<double>());
  throw std::invalid_argument(std::string("field '") + key + "' is not a number");
}

inline Document parse_reddit_object(const std::string& line) {
  const auto obj = nlohmann::json::parse(line);
  if (!obj.is_object()) throw std::invalid_argument("line is not a JSON object");

  Document doc;
  auto id_it = obj.find("id");
  if (id_it == obj.end() || !id_it->is_string() || id_it->get<std::string>().empty()) {
    throw std::invalid_argument("missing or empty 'id'");
  }
  doc.id = id_it->get<std::string>();
  doc.source = text_field(obj, "subreddit");
  doc.title = normalize_text(text_field(obj, "title"));
  doc.body = compose_body(doc.title, text_field(obj, "selftext"), text_field(obj, "top_comment"));
  doc.score = int_field(obj, "score");
  doc.created_at = int_field(obj, "created_utc");
  if (doc.body.empty()) throw std::invalid_argument("document body is empty");
  return doc;
}

inline bool is_blank(std::string_view line) {
  return std::all_of(line.begin(), line.end(),
                     [](char c) { return c == ' ' || c == '\t' || c == '\r'; });
}

}  // namespace detail

/// Parses a Reddit-export JSONL stream. Lenient mode skips (and counts)
/// malformed lines; strict mode throws MalformedLineError on the first one.
/// A repeated id counts as malformed.
inline std::pair<std::vector<Document>, CorpusStats> parse_reddit_jsonl(std::istream& in,
                                                                        bool lenient) {
  std::vector<Document> docs;
  CorpusStats stats;
  std::unordered_set<std::string> seen_ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    ++stats.documents_in;
    try {
      Document doc = detail::parse_reddit_object(line);
      if (!seen_ids.insert(doc.id).second) {
        throw std::invalid_argument("duplicate id '" + doc.id + "'");
      }
      docs.push_back(std::move(doc));
    } catch (const std::exception& e) {
      if (!lenient) throw MalformedLineError(line_no, e.what());
      ++stats.lines_skipped;
    }
  }
  if (docs.empty()) throw Error(ErrorCode::kEmptyCorpus, "no documents parsed from JSONL input");
  stats.documents_kept = docs.size();
  return {std::move(docs), stats};
}

/// One Document per .txt/.md file under `root`, recursively. Files whose
/// normalized contents are empty are skipped.
inline std::vector<Document> ingest_text_dir(const std::filesystem::path& root) {
  namespace fs = std::filesystem;
  std::error_code ec;
  if (!fs::is_directory(root, ec)) {
    throw Error(ErrorCode::kPathNotFound, "not a directory: " + root.string());
  }

  std::vector<Document> docs;
  for (auto it = fs::recursive_directory_iterator(root, ec); !ec && it != fs::recursive_directory_iterator();
       it.increment(ec)) {
    if (!it->is_regular_file()) continue;
    const auto ext = it->path().extension().string();
    if (ext != ".txt" && ext != ".md") continue;

    std::ifstream file(it->path(), std::ios::binary);
    if (!file) throw Error(ErrorCode::kIoError, "cannot read " + it->path().string());
    std::ostringstream buf;
    buf << file.rdbuf();

    Document doc;
    doc.id = fs::relative(it->path(), root).generic_string();
    doc.source = doc.id;
    doc.title = utf8::sanitize(it->path().stem().string());
    doc.body = normalize_text(utf8::sanitize(buf.str()));
    if (doc.body.empty()) continue;
    docs.push_back(std::move(doc));
  }
  if (ec) throw Error(ErrorCode::kIoError, "walking " + root.string() + ": " + ec.message());
  if (docs.empty()) throw Error(ErrorCode::kEmptyCorpus, "no .txt or .md files under " + root.string());

  std::sort(docs.begin(), docs.end(), [](const Document& a, const Document& b) { return a.id < b.id; });
  return docs;
}

/// Dedup key: case-folded body with whitespace runs collapsed to one space.
inline std::string dedup_key(std::string_view body) {
  std::string folded = utf8::case_fold(body);
  std::string key;
  key.reserve(folded.size());
  bool pending_space = false;
  for (std::size_t pos = 0; pos < folded.size();) {
    auto d = utf8::detail::decode_at(folded, pos);
    const std::size_t len = d ? d->second : 1;
    if (d && utf8::is_space(d->first)) {
      pending_space = !key.empty();
    } else {
      if (pending_space) key.push_back(' ');
      pending_space = false;
      key.append(folded, pos, len);
    }
    pos += len;
  }
  return key;
}

inline std::pair<std::vector<Document>, CorpusStats> dedup(std::vector<Document> docs) {
  CorpusStats stats;
  stats.documents_in = docs.size();
  std::unordered_set<std::string> seen;
  std::vector<Document> kept;
  kept.reserve(docs.size());
  for (auto& doc : docs) {
    if (seen.insert(dedup_key(doc.body)).second) {
      kept.push_back(std::move(doc));
    } else {
      ++stats.duplicates_removed;
    }
  }
  stats.documents_kept = kept.size();
  return {std::move(kept), stats};
}

// ---------------------------------------------------------------------------
// Corpus store (JSONL, one Document per line, fixed field order)
// ---------------------------------------------------------------------------

inline nlohmann::ordered_json to_json(const Document& doc) {
  nlohmann::ordered_json j;
  j["id"] = doc.id;
  j["source"] = doc.source;
  j["title"] = doc.title;
  j["body"] = doc.body;
  j["score"] = doc.score;
  j["created_at"] = doc.created_at;
  return j;
}

inline void write_store(std::ostream& out, const std::vector<Document>& docs) {
  for (const auto& doc : docs) out << to_json(doc).dump() << '\n';
}

inline void save_store(const std::filesystem::path& path, const std::vector<Document>& docs) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  write_store(out, docs);
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

inline std::vector<Document> read_store(std::istream& in) {
  std::vector<Document> docs;
  std::unordered_set<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (detail::is_blank(line)) continue;
    try {
      const auto j = nlohmann::json::parse(line);
      Document doc{j.at("id").get<std::string>(),       j.at("source").get<std::string>(),
                   j.at("title").get<std::string>(),    j.at("body").get<std::string>(),
                   j.at("score").get<std::int64_t>(),   j.at("created_at").get<std::int64_t>()};
      if (doc.id.empty() || doc.body.empty()) throw std::invalid_argument("empty id or body");
      if (!ids.insert(doc.id).second) throw std::invalid_argument("duplicate id '" + doc.id + "'");
      docs.push_back(std::move(doc));
    } catch (const std::exception& e) {
      throw MalformedLineError(line_no, e.what());
    }
  }
  if (docs.empty()) throw Error(ErrorCode::kEmptyCorpus, "corpus store is empty");
  return docs;
}

inline std::vector<Document> load_store(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kPathNotFound, "cannot open corpus " + path.string());
  return read_store(in);
}

}  // namespace ragbench::corpus
