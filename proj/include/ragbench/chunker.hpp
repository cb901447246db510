#pragma once

// Fixed-size sliding-window chunking over Unicode scalar values.

#include <cstddef>
#include <ostream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ragbench/corpus.hpp"
#include "ragbench/error.hpp"
#include "ragbench/utf8.hpp"

namespace ragbench::chunker {

struct ChunkConfig {
  std::size_t size = 1000;
  std::size_t overlap = 0;

  std::size_t stride() const { return size - overlap; }

  void validate() const {
    if (size == 0) throw Error(ErrorCode::kInvalidConfig, "chunk size must be > 0");
    if (overlap >= size) {
      throw Error(ErrorCode::kInvalidConfig, "chunk overlap (" + std::to_string(overlap) +
                                                 ") must be smaller than size (" +
                                                 std::to_string(size) + ")");
    }
  }
};

struct Chunk {
  std::string doc_id;
  std::size_t seq = 0;
  std::string text;
  std::size_t char_start = 0;  // codepoint offsets, half-open
  std::size_t char_end = 0;

  friend bool operator==(const Chunk&, const Chunk&) = default;
};

/// Chunk k covers codepoints [k*stride, min(k*stride + size, len)); stops
/// after the first chunk that reaches the end of the text.
inline std::vector<Chunk> chunk_text(std::string_view text, const ChunkConfig& cfg,
                                     std::string_view doc_id = {}) {
  cfg.validate();
  if (text.empty()) throw Error(ErrorCode::kEmptyText, "cannot chunk empty text");

  const auto offsets = utf8::boundaries(text);  // length + 1 entries
  const std::size_t length = offsets.size() - 1;

  std::vector<Chunk> chunks;
  chunks.reserve(length / cfg.stride() + 1);
  for (std::size_t start = 0, seq = 0;; start += cfg.stride(), ++seq) {
    const std::size_t end = std::min(start + cfg.size, length);
    chunks.push_back(Chunk{std::string(doc_id), seq,
                           std::string(text.substr(offsets[start], offsets[end] - offsets[start])),
                           start, end});
    if (end == length) break;
  }
  return chunks;
}

inline std::vector<Chunk> chunk_corpus(const std::vector<corpus::Document>& docs,
                                       const ChunkConfig& cfg) {
  cfg.validate();
  if (docs.empty()) throw Error(ErrorCode::kEmptyCorpus, "no documents to chunk");
  std::vector<Chunk> out;
  for (const auto& doc : docs) {
    auto chunks = chunk_text(doc.body, cfg, doc.id);
    out.insert(out.end(), std::make_move_iterator(chunks.begin()),
               std::make_move_iterator(chunks.end()));
  }
  return out;
}

inline nlohmann::ordered_json to_json(const Chunk& c) {
  nlohmann::ordered_json j;
  j["doc_id"] = c.doc_id;
  j["seq"] = c.seq;
  j["text"] = c.text;
  j["char_start"] = c.char_start;
  j["char_end"] = c.char_end;
  return j;
}

inline void write_jsonl(std::ostream& out, const std::vector<Chunk>& chunks) {
  for (const auto& c : chunks) out << to_json(c).dump() << '\n';
}

}  // namespace ragbench::chunker
