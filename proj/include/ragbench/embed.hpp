#pragma once

// Embedding backends and the cosine similarity kernel.

#include <algorithm>
#include <cmath>
#include <cstddef>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <span>
#include <sstream>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ragbench/atomic_file.hpp"
#include "ragbench/error.hpp"
#include "ragbench/hashing.hpp"
#include "ragbench/http.hpp"
#include "ragbench/parallel.hpp"
#include "ragbench/utf8.hpp"

namespace ragbench::embed {

/// Dense embedding. Non-empty; all components finite.
class Vector {
 public:
  Vector() = default;
  explicit Vector(std::vector<double> values) : values_(std::move(values)) {
    if (values_.empty()) throw Error(ErrorCode::kDimMismatch, "vector dimension must be > 0");
    for (double v : values_) {
      if (!std::isfinite(v)) throw Error(ErrorCode::kProtocolError, "vector has a non-finite component");
    }
  }
  Vector(std::initializer_list<double> values) : Vector(std::vector<double>(values)) {}

  std::size_t dim() const { return values_.size(); }
  std::span<const double> values() const { return values_; }
  double operator[](std::size_t i) const { return values_[i]; }

  double norm() const {
    double sq = 0.0;
    for (double v : values_) sq += v * v;
    return std::sqrt(sq);
  }

  friend bool operator==(const Vector&, const Vector&) = default;

 private:
  std::vector<double> values_;
};

/// dot(a,b) / (|a||b|), summed in index order; 0 when either norm is 0.
inline double cosine(const Vector& a, const Vector& b) {
  if (a.dim() != b.dim()) {
    throw Error(ErrorCode::kDimMismatch,
                "cosine of dim " + std::to_string(a.dim()) + " and " + std::to_string(b.dim()));
  }
  double dot = 0.0, na = 0.0, nb = 0.0;
  for (std::size_t i = 0; i < a.dim(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) return 0.0;
  // The product form keeps cosine(a,b) == cosine(b,a) bit for bit.
  const double c = dot / (std::sqrt(na) * std::sqrt(nb));
  return std::clamp(c, -1.0, 1.0);
}

inline constexpr std::size_t kDefaultOfflineDim = 256;

/// Hashed byte-trigram bag: case-fold, hash every 3-byte window of the UTF-8
/// encoding with FNV-1a-64 into `dim` buckets, L2-normalize. Texts shorter
/// than three bytes hash as a single gram.
inline Vector embed_offline(std::string_view text, std::size_t dim = kDefaultOfflineDim) {
  if (text.empty()) throw Error(ErrorCode::kEmptyText, "cannot embed empty text");
  if (dim == 0) throw Error(ErrorCode::kInvalidConfig, "embedding dim must be > 0");

  const std::string folded = utf8::case_fold(text);
  std::vector<double> buckets(dim, 0.0);
  const std::string_view bytes(folded);
  if (bytes.size() < 3) {
    buckets[hashing::fnv1a64(bytes) % dim] += 1.0;
  } else {
    for (std::size_t i = 0; i + 3 <= bytes.size(); ++i) {
      buckets[hashing::fnv1a64(bytes.substr(i, 3)) % dim] += 1.0;
    }
  }
  double sq = 0.0;
  for (double v : buckets) sq += v * v;
  const double inv = 1.0 / std::sqrt(sq);
  for (double& v : buckets) v *= inv;
  return Vector(std::move(buckets));
}

enum class EmbedderKind { kOffline, kRemote };

struct EmbedderConfig {
  EmbedderKind kind = EmbedderKind::kOffline;
  std::size_t dim = kDefaultOfflineDim;  // offline only
  std::string endpoint_url;              // remote only
  std::string model;                     // remote only
  std::size_t max_concurrency = 4;
  long long timeout_ms = 30000;
  int max_retries = 3;

  void validate() const {
    if (max_concurrency == 0) throw Error(ErrorCode::kInvalidConfig, "max_concurrency must be >= 1");
    if (timeout_ms <= 0) throw Error(ErrorCode::kInvalidConfig, "timeout_ms must be > 0");
    if (max_retries < 0) throw Error(ErrorCode::kInvalidConfig, "max_retries must be >= 0");
    if (kind == EmbedderKind::kOffline) {
      if (dim == 0) throw Error(ErrorCode::kInvalidConfig, "offline embedder dim must be > 0");
      if (!endpoint_url.empty() || !model.empty()) {
        throw Error(ErrorCode::kInvalidConfig, "endpoint_url/model are only valid for a remote embedder");
      }
    } else {
      if (endpoint_url.empty() || model.empty()) {
        throw Error(ErrorCode::kInvalidConfig, "remote embedder needs endpoint_url and model");
      }
    }
  }
};

class Embedder {
 public:
  virtual ~Embedder() = default;
  /// One vector per input, in input order. Every text must be non-empty.
  virtual std::vector<Vector> embed(std::span<const std::string> texts) = 0;
  /// Stable identity of the backend, used in cache keys.
  virtual std::string identity() const = 0;

  Vector embed_one(const std::string& text) {
    auto v = embed(std::span(&text, 1));
    return std::move(v.front());
  }
};

class OfflineEmbedder final : public Embedder {
 public:
  explicit OfflineEmbedder(std::size_t dim = kDefaultOfflineDim) : dim_(dim) {
    if (dim_ == 0) throw Error(ErrorCode::kInvalidConfig, "embedding dim must be > 0");
  }

  std::vector<Vector> embed(std::span<const std::string> texts) override {
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (const auto& t : texts) out.push_back(embed_offline(t, dim_));
    return out;
  }

  std::string identity() const override { return "offline-trigram-fnv1a64/" + std::to_string(dim_); }

 private:
  std::size_t dim_;
};

inline constexpr std::size_t kMaxBatch = 64;

/// Parses an embeddings response body into exactly `expected` vectors.
/// Items carrying an "index" field are placed by it; otherwise array order.
inline std::vector<Vector> parse_embeddings_response(const std::string& body, std::size_t expected) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kProtocolError, std::string("embeddings response is not JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("data") || !j["data"].is_array()) {
    throw Error(ErrorCode::kProtocolError, "embeddings response lacks a 'data' array");
  }
  const auto& data = j["data"];
  if (data.size() != expected) {
    throw Error(ErrorCode::kProtocolError, "expected " + std::to_string(expected) +
                                               " embeddings, got " + std::to_string(data.size()));
  }

  std::vector<std::optional<Vector>> slots(expected);
  std::optional<std::size_t> dim;
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto& item = data[i];
    if (!item.is_object() || !item.contains("embedding") || !item["embedding"].is_array()) {
      throw Error(ErrorCode::kProtocolError, "embedding item " + std::to_string(i) + " is malformed");
    }
    std::size_t slot = i;
    if (auto it = item.find("index"); it != item.end()) {
      if (!it->is_number_unsigned() || it->get<std::size_t>() >= expected) {
        throw Error(ErrorCode::kProtocolError, "embedding item has a bad index");
      }
      slot = it->get<std::size_t>();
    }
    if (slots[slot]) throw Error(ErrorCode::kProtocolError, "duplicate embedding index");

    std::vector<double> values;
    values.reserve(item["embedding"].size());
    for (const auto& v : item["embedding"]) {
      if (!v.is_number()) throw Error(ErrorCode::kProtocolError, "embedding component is not a number");
      values.push_back(v.get<double>());
    }
    if (values.empty()) throw Error(ErrorCode::kProtocolError, "empty embedding");
    if (dim && *dim != values.size()) {
      throw Error(ErrorCode::kDimMismatch, "embeddings in one response have dims " +
                                               std::to_string(*dim) + " and " +
                                               std::to_string(values.size()));
    }
    dim = values.size();
    slots[slot] = Vector(std::move(values));
  }

  std::vector<Vector> out;
  out.reserve(expected);
  for (auto& s : slots) out.push_back(std::move(*s));
  return out;
}

/// OpenAI-compatible POST {endpoint}/v1/embeddings client.
class RemoteEmbedder final : public Embedder {
 public:
  explicit RemoteEmbedder(EmbedderConfig cfg,
                          std::shared_ptr<http::Transport> transport = http::default_transport(),
                          http::RetryPolicy retry = {})
      : cfg_(std::move(cfg)), transport_(std::move(transport)), retry_(std::move(retry)) {
    cfg_.validate();
    if (cfg_.kind != EmbedderKind::kRemote) {
      throw Error(ErrorCode::kInvalidConfig, "RemoteEmbedder needs a remote config");
    }
    retry_.max_retries = cfg_.max_retries;
  }

  std::vector<Vector> embed(std::span<const std::string> texts) override {
    if (texts.empty()) throw Error(ErrorCode::kEmptyText, "no texts to embed");
    for (const auto& t : texts) {
      if (t.empty()) throw Error(ErrorCode::kEmptyText, "cannot embed empty text");
    }

    const std::size_t batches = (texts.size() + kMaxBatch - 1) / kMaxBatch;
    std::vector<std::vector<Vector>> results(batches);
    const auto url = http::join_url(cfg_.endpoint_url, "/v1/embeddings");
    parallel_for(batches, cfg_.max_concurrency, [&](std::size_t b) {
      const auto first = b * kMaxBatch;
      const auto batch = texts.subspan(first, std::min(kMaxBatch, texts.size() - first));
      nlohmann::json req{{"model", cfg_.model},
                         {"input", std::vector<std::string>(batch.begin(), batch.end())}};
      const auto resp = http::post_with_retry(*transport_, url, req.dump(),
                                              std::chrono::milliseconds(cfg_.timeout_ms), retry_);
      results[b] = parse_embeddings_response(resp.body, batch.size());
    });

    std::vector<Vector> out;
    out.reserve(texts.size());
    for (auto& r : results) {
      for (auto& v : r) {
        if (!out.empty() && out.front().dim() != v.dim()) {
          throw Error(ErrorCode::kDimMismatch, "embedding batches disagree on dimension");
        }
        out.push_back(std::move(v));
      }
    }
    return out;
  }

  std::string identity() const override { return "remote:" + cfg_.endpoint_url + "#" + cfg_.model; }

 private:
  EmbedderConfig cfg_;
  std::shared_ptr<http::Transport> transport_;
  http::RetryPolicy retry_;
};

/// Content-addressed on-disk cache in front of another embedder. One file
/// per (backend identity, text) under `dir`, holding the vector as JSON.
/// Unreadable entries are recomputed and overwritten.
class CachedEmbedder final : public Embedder {
 public:
  CachedEmbedder(std::shared_ptr<Embedder> inner, std::filesystem::path dir)
      : inner_(std::move(inner)), dir_(std::move(dir)) {
    std::filesystem::create_directories(dir_);
  }

  std::vector<Vector> embed(std::span<const std::string> texts) override {
    std::vector<std::optional<Vector>> found(texts.size());
    std::vector<std::string> keys(texts.size());
    std::vector<std::string> missing;
    std::vector<std::size_t> missing_at;
    for (std::size_t i = 0; i < texts.size(); ++i) {
      if (texts[i].empty()) throw Error(ErrorCode::kEmptyText, "cannot embed empty text");
      keys[i] = key_for(texts[i]);
      found[i] = read_entry(keys[i]);
      if (!found[i]) {
        missing.push_back(texts[i]);
        missing_at.push_back(i);
      }
    }
    if (!missing.empty()) {
      auto fresh = inner_->embed(missing);
      for (std::size_t j = 0; j < fresh.size(); ++j) {
        write_entry(keys[missing_at[j]], fresh[j]);
        found[missing_at[j]] = std::move(fresh[j]);
      }
    }
    std::vector<Vector> out;
    out.reserve(texts.size());
    for (auto& v : found) out.push_back(std::move(*v));
    return out;
  }

  std::string identity() const override { return inner_->identity(); }

  std::string key_for(const std::string& text) const {
    nlohmann::json k{{"embedder", inner_->identity()}, {"input", text}};
    return hashing::sha256_hex(k.dump());
  }

 private:
  std::optional<Vector> read_entry(const std::string& key) const {
    std::ifstream in(dir_ / key, std::ios::binary);
    if (!in) return std::nullopt;
    try {
      const auto j = nlohmann::json::parse(in);
      if (j.at("request_key").get<std::string>() != key) return std::nullopt;
      return Vector(j.at("embedding").get<std::vector<double>>());
    } catch (const std::exception&) {
      return std::nullopt;
    }
  }

  void write_entry(const std::string& key, const Vector& v) const {
    nlohmann::json j{{"request_key", key},
                     {"embedding", std::vector<double>(v.values().begin(), v.values().end())}};
    write_file_atomic(dir_ / key, j.dump());
  }

  std::shared_ptr<Embedder> inner_;
  std::filesystem::path dir_;
};

}  // namespace ragbench::embed
