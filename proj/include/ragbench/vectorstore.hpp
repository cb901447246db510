#pragma once

// Exact cosine top-k index with the RGBV binary persistence format.
//
// File layout (all integers little-endian):
//   "RGBV" | version:u8 = 1 | dim:u32 | count:u64
//   count x { ref_len:u32 | ref bytes ("doc_id\0seq") | text_len:u32 | text | dim x f64 }
//   crc32:u32 over every preceding byte

#include <algorithm>
#include <bit>
#include <cstdint>
#include <cstring>
#include <filesystem>
#include <fstream>
#include <limits>
#include <numeric>
#include <set>
#include <sstream>
#include <string>
#include <string_view>
#include <tuple>
#include <vector>

#include "ragbench/embed.hpp"
#include "ragbench/error.hpp"
#include "ragbench/hashing.hpp"

namespace ragbench::vectorstore {

struct ChunkRef {
  std::string doc_id;
  std::size_t seq = 0;

  friend auto operator<=>(const ChunkRef&, const ChunkRef&) = default;
  friend bool operator==(const ChunkRef&, const ChunkRef&) = default;

  std::string to_string() const { return doc_id + "#" + std::to_string(seq); }
};

struct IndexEntry {
  ChunkRef ref;
  embed::Vector vector;
  std::string text;
};

struct Hit {
  ChunkRef ref;
  double score = 0.0;
  std::size_t rank = 0;
  std::size_t position = 0;  // entry position in the index

  friend bool operator==(const Hit&, const Hit&) = default;
};

inline constexpr char kMagic[4] = {'R', 'G', 'B', 'V'};
inline constexpr std::uint8_t kFormatVersion = 1;

class Index {
 public:
  static Index build(std::vector<IndexEntry> entries) {
    if (entries.empty()) throw Error(ErrorCode::kEmptyIndex, "cannot build an index with no entries");
    const std::size_t dim = entries.front().vector.dim();
    std::set<ChunkRef> refs;
    for (const auto& e : entries) {
      if (e.vector.dim() != dim) {
        throw Error(ErrorCode::kDimMismatch, "entry " + e.ref.to_string() + " has dim " +
                                                 std::to_string(e.vector.dim()) + ", index dim is " +
                                                 std::to_string(dim));
      }
      if (!refs.insert(e.ref).second) {
        throw Error(ErrorCode::kDuplicateRef, "duplicate chunk ref " + e.ref.to_string());
      }
    }
    Index idx;
    idx.dim_ = dim;
    idx.entries_ = std::move(entries);
    return idx;
  }

  std::size_t dim() const { return dim_; }
  std::size_t size() const { return entries_.size(); }
  const std::vector<IndexEntry>& entries() const { return entries_; }
  const IndexEntry& entry(std::size_t position) const { return entries_.at(position); }

  /// Highest-cosine entries first; ties by ref ascending. k is clamped to size().
  std::vector<Hit> query_topk(const embed::Vector& q, std::size_t k) const {
    if (q.dim() != dim_) {
      throw Error(ErrorCode::kDimMismatch, "query dim " + std::to_string(q.dim()) +
                                               " does not match index dim " + std::to_string(dim_));
    }
    if (k == 0) throw Error(ErrorCode::kInvalidConfig, "k must be >= 1");

    std::vector<double> scores(entries_.size());
    for (std::size_t i = 0; i < entries_.size(); ++i) scores[i] = embed::cosine(q, entries_[i].vector);

    std::vector<std::size_t> order(entries_.size());
    std::iota(order.begin(), order.end(), std::size_t{0});
    const auto better = [&](std::size_t a, std::size_t b) {
      if (scores[a] != scores[b]) return scores[a] > scores[b];
      return entries_[a].ref < entries_[b].ref;
    };
    k = std::min(k, entries_.size());
    std::partial_sort(order.begin(), order.begin() + static_cast<std::ptrdiff_t>(k), order.end(), better);

    std::vector<Hit> hits;
    hits.reserve(k);
    for (std::size_t r = 0; r < k; ++r) {
      hits.push_back(Hit{entries_[order[r]].ref, scores[order[r]], r, order[r]});
    }
    return hits;
  }

  std::string serialize() const;
  static Index deserialize(std::string_view bytes);

  void save(const std::filesystem::path& path) const;
  static Index load(const std::filesystem::path& path);

 private:
  std::size_t dim_ = 0;
  std::vector<IndexEntry> entries_;
};

namespace detail {

template <typename T>
void put_le(std::string& out, T value) {
  using U = std::make_unsigned_t<T>;
  auto u = static_cast<U>(value);
  for (std::size_t i = 0; i < sizeof(T); ++i) {
    out.push_back(static_cast<char>(u & 0xFF));
    u = static_cast<U>(u >> 8);
  }
}

inline void put_f64(std::string& out, double v) { put_le(out, std::bit_cast<std::uint64_t>(v)); }

class Reader {
 public:
  explicit Reader(std::string_view bytes) : bytes_(bytes) {}

  template <typename T>
  T le() {
    need(sizeof(T));
    std::make_unsigned_t<T> u = 0;
    for (std::size_t i = 0; i < sizeof(T); ++i) {
      u |= static_cast<std::make_unsigned_t<T>>(static_cast<unsigned char>(bytes_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    return static_cast<T>(u);
  }

  double f64() { return std::bit_cast<double>(le<std::uint64_t>()); }

  std::string_view take(std::size_t n) {
    need(n);
    auto s = bytes_.substr(pos_, n);
    pos_ += n;
    return s;
  }

  bool at_end() const { return pos_ == bytes_.size(); }

 private:
  void need(std::size_t n) const {
    if (bytes_.size() - pos_ < n) throw Error(ErrorCode::kFormatError, "index file ends mid-record");
  }

  std::string_view bytes_;
  std::size_t pos_ = 0;
};

inline ChunkRef parse_ref(std::string_view raw) {
  const auto nul = raw.find('\0');
  if (nul == std::string_view::npos || nul + 1 == raw.size()) {
    throw Error(ErrorCode::kFormatError, "chunk ref lacks a seq part");
  }
  const auto digits = raw.substr(nul + 1);
  std::size_t seq = 0;
  for (char c : digits) {
    if (c < '0' || c > '9') throw Error(ErrorCode::kFormatError, "chunk ref seq is not decimal");
    if (seq > (std::numeric_limits<std::size_t>::max() - 9) / 10) {
      throw Error(ErrorCode::kFormatError, "chunk ref seq overflows");
    }
    seq = seq * 10 + static_cast<std::size_t>(c - '0');
  }
  return {std::string(raw.substr(0, nul)), seq};
}

}  // namespace detail

inline std::string Index::serialize() const {
  std::string out(kMagic, sizeof(kMagic));
  out.push_back(static_cast<char>(kFormatVersion));
  detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(dim_));
  detail::put_le<std::uint64_t>(out, entries_.size());
  for (const auto& e : entries_) {
    std::string ref = e.ref.doc_id;
    ref.push_back('\0');
    ref += std::to_string(e.ref.seq);
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(ref.size()));
    out += ref;
    detail::put_le<std::uint32_t>(out, static_cast<std::uint32_t>(e.text.size()));
    out += e.text;
    for (double v : e.vector.values()) detail::put_f64(out, v);
  }
  detail::put_le<std::uint32_t>(out, hashing::crc32(out));
  return out;
}

inline Index Index::deserialize(std::string_view bytes) {
  constexpr std::size_t kHeader = sizeof(kMagic) + 1 + 4 + 8;
  if (bytes.size() < sizeof(kMagic) || std::memcmp(bytes.data(), kMagic, sizeof(kMagic)) != 0) {
    throw Error(ErrorCode::kFormatError, "bad magic (not an RGBV index)");
  }
  if (bytes.size() < sizeof(kMagic) + 1) throw Error(ErrorCode::kFormatError, "missing version byte");
  if (static_cast<std::uint8_t>(bytes[sizeof(kMagic)]) != kFormatVersion) {
    throw Error(ErrorCode::kFormatError,
                "unsupported index version " + std::to_string(static_cast<unsigned char>(bytes[4])));
  }
  if (bytes.size() < kHeader + 4) throw Error(ErrorCode::kFormatError, "index file too short");

  const auto body = bytes.substr(0, bytes.size() - 4);
  detail::Reader trailer(bytes.substr(bytes.size() - 4));
  if (trailer.le<std::uint32_t>() != hashing::crc32(body)) {
    throw Error(ErrorCode::kChecksumError, "index CRC-32 mismatch");
  }

  detail::Reader in(body.substr(sizeof(kMagic) + 1));
  const auto dim = in.le<std::uint32_t>();
  const auto count = in.le<std::uint64_t>();
  if (dim == 0) throw Error(ErrorCode::kFormatError, "index dim is 0");
  if (count == 0) throw Error(ErrorCode::kFormatError, "index has no entries");

  std::vector<IndexEntry> entries;
  // Each entry needs at least 8 length bytes plus its vector.
  if (count > body.size() / (8 + 8 * static_cast<std::uint64_t>(dim))) {
    throw Error(ErrorCode::kFormatError, "entry count exceeds file size");
  }
  entries.reserve(count);
  for (std::uint64_t i = 0; i < count; ++i) {
    IndexEntry e;
    e.ref = detail::parse_ref(in.take(in.le<std::uint32_t>()));
    e.text = std::string(in.take(in.le<std::uint32_t>()));
    std::vector<double> values(dim);
    for (auto& v : values) v = in.f64();
    try {
      e.vector = embed::Vector(std::move(values));
    } catch (const Error& err) {
      throw Error(ErrorCode::kFormatError, std::string("bad vector: ") + err.what());
    }
    entries.push_back(std::move(e));
  }
  if (!in.at_end()) throw Error(ErrorCode::kFormatError, "trailing bytes after last entry");

  try {
    return build(std::move(entries));
  } catch (const Error& err) {
    throw Error(ErrorCode::kFormatError, err.what());
  }
}

inline void Index::save(const std::filesystem::path& path) const {
  const auto bytes = serialize();
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw Error(ErrorCode::kIoError, "cannot write " + path.string());
  out.write(bytes.data(), static_cast<std::streamsize>(bytes.size()));
  if (!out) throw Error(ErrorCode::kIoError, "write failed: " + path.string());
}

inline Index Index::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kIoError, "cannot open " + path.string());
  std::ostringstream buf;
  buf << in.rdbuf();
  return deserialize(buf.str());
}

}  // namespace ragbench::vectorstore
