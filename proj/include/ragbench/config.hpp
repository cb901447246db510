#pragma once

// Application config file (JSON) and backend construction.

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <initializer_list>
#include <memory>
#include <optional>
#include <string>
#include <string_view>

#include <nlohmann/json.hpp>

#include "ragbench/embed.hpp"
#include "ragbench/error.hpp"
#include "ragbench/llm.hpp"
#include "ragbench/metrics.hpp"
#include "ragbench/rag.hpp"
#include "ragbench/sweep.hpp"

namespace ragbench::config {

enum class GeneratorKind { kMock, kRemote };

struct GeneratorConfig {
  GeneratorKind kind = GeneratorKind::kMock;
  llm::RemoteChatConfig remote;  // used when kind == kRemote

  void validate() const {
    if (kind == GeneratorKind::kRemote) {
      remote.validate();
    } else if (!remote.endpoint_url.empty() || !remote.model.empty()) {
      throw Error(ErrorCode::kInvalidConfig, "endpoint_url/model are only valid for a remote generator");
    }
  }

  std::string model() const { return kind == GeneratorKind::kRemote ? remote.model : "mock"; }
};

struct AppConfig {
  embed::EmbedderConfig embedder;
  GeneratorConfig generator;
  rag::RagConfig rag;
  metrics::MetricConfig metric;
  std::string judge_model;  // remote judge; defaults to the generator model
  std::vector<std::size_t> chunk_sizes = sweep::kDefaultChunkSizes;
  std::size_t overlap = 0;
  bool keep_going = false;
  std::filesystem::path cache_dir;  // empty: caching off
  std::filesystem::path output_dir = "out";

  void validate() const {
    embedder.validate();
    generator.validate();
    rag.validate();
    metric.validate();
    if (metric.judge == metrics::JudgeKind::kRemote && generator.kind != GeneratorKind::kRemote) {
      throw Error(ErrorCode::kInvalidConfig, "the remote judge needs a remote generator endpoint");
    }
    sweep_config().validate();
  }

  sweep::SweepConfig sweep_config() const {
    sweep::SweepConfig s;
    s.chunk_sizes = chunk_sizes;
    s.overlap = overlap;
    s.rag = rag;
    s.rag.model = generator.model();
    s.metric = metric;
    s.keep_going = keep_going;
    s.max_concurrency =
        generator.kind == GeneratorKind::kRemote ? generator.remote.max_concurrency : 1;
    return s;
  }
};

namespace detail {

inline void reject_unknown(const nlohmann::json& obj, std::string_view where,
                           std::initializer_list<std::string_view> allowed) {
  if (!obj.is_object()) throw Error(ErrorCode::kInvalidConfig, std::string(where) + " must be an object");
  for (const auto& [key, _] : obj.items()) {
    if (std::find(allowed.begin(), allowed.end(), key) == allowed.end()) {
      throw Error(ErrorCode::kInvalidConfig, "unknown key '" + key + "' in " + std::string(where));
    }
  }
}

template <typename T>
void read(const nlohmann::json& obj, const char* key, T& out, std::string_view where) {
  auto it = obj.find(key);
  if (it == obj.end()) return;
  try {
    out = it->get<T>();
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, std::string(where) + "." + key + ": " + e.what());
  }
}

}  // namespace detail

/// Parses and key-checks a config object. Call validate() after applying
/// any command-line overrides.
inline AppConfig parse_config(const nlohmann::json& j) {
  using detail::read;
  using detail::reject_unknown;
  AppConfig cfg;
  reject_unknown(j, "config",
                 {"embedder", "generator", "rag", "metric", "sweep", "cache_dir", "output_dir"});

  if (auto it = j.find("embedder"); it != j.end()) {
    const auto& e = *it;
    reject_unknown(e, "embedder",
                   {"kind", "dim", "endpoint_url", "model", "max_concurrency", "timeout_ms", "max_retries"});
    std::string kind = "offline";
    read(e, "kind", kind, "embedder");
    if (kind == "offline") {
      cfg.embedder.kind = embed::EmbedderKind::kOffline;
    } else if (kind == "remote") {
      cfg.embedder.kind = embed::EmbedderKind::kRemote;
    } else {
      throw Error(ErrorCode::kInvalidConfig, "embedder.kind must be 'offline' or 'remote'");
    }
    read(e, "dim", cfg.embedder.dim, "embedder");
    read(e, "endpoint_url", cfg.embedder.endpoint_url, "embedder");
    read(e, "model", cfg.embedder.model, "embedder");
    read(e, "max_concurrency", cfg.embedder.max_concurrency, "embedder");
    read(e, "timeout_ms", cfg.embedder.timeout_ms, "embedder");
    read(e, "max_retries", cfg.embedder.max_retries, "embedder");
  }

  if (auto it = j.find("generator"); it != j.end()) {
    const auto& g = *it;
    reject_unknown(g, "generator",
                   {"kind", "endpoint_url", "model", "max_concurrency", "timeout_ms", "max_retries"});
    std::string kind = "mock";
    read(g, "kind", kind, "generator");
    if (kind == "mock") {
      cfg.generator.kind = GeneratorKind::kMock;
    } else if (kind == "remote") {
      cfg.generator.kind = GeneratorKind::kRemote;
    } else {
      throw Error(ErrorCode::kInvalidConfig, "generator.kind must be 'mock' or 'remote'");
    }
    read(g, "endpoint_url", cfg.generator.remote.endpoint_url, "generator");
    read(g, "model", cfg.generator.remote.model, "generator");
    read(g, "max_concurrency", cfg.generator.remote.max_concurrency, "generator");
    read(g, "timeout_ms", cfg.generator.remote.timeout_ms, "generator");
    read(g, "max_retries", cfg.generator.remote.max_retries, "generator");
  }

  if (auto it = j.find("rag"); it != j.end()) {
    const auto& r = *it;
    reject_unknown(r, "rag",
                   {"top_k", "max_context_chars", "prompt_template", "system_prompt", "temperature", "max_tokens"});
    read(r, "top_k", cfg.rag.top_k, "rag");
    read(r, "max_context_chars", cfg.rag.max_context_chars, "rag");
    read(r, "prompt_template", cfg.rag.prompt_template, "rag");
    read(r, "system_prompt", cfg.rag.system_prompt, "rag");
    read(r, "temperature", cfg.rag.temperature, "rag");
    read(r, "max_tokens", cfg.rag.max_tokens, "rag");
  }

  if (auto it = j.find("metric"); it != j.end()) {
    const auto& m = *it;
    reject_unknown(m, "metric", {"w_factual", "w_semantic", "judge", "jaccard_threshold", "judge_model"});
    read(m, "w_factual", cfg.metric.w_factual, "metric");
    read(m, "w_semantic", cfg.metric.w_semantic, "metric");
    read(m, "jaccard_threshold", cfg.metric.jaccard_threshold, "metric");
    read(m, "judge_model", cfg.judge_model, "metric");
    std::string judge = "lexical";
    read(m, "judge", judge, "metric");
    if (judge == "lexical") {
      cfg.metric.judge = metrics::JudgeKind::kLexical;
    } else if (judge == "remote") {
      cfg.metric.judge = metrics::JudgeKind::kRemote;
    } else {
      throw Error(ErrorCode::kInvalidConfig, "metric.judge must be 'lexical' or 'remote'");
    }
  }

  if (auto it = j.find("sweep"); it != j.end()) {
    const auto& s = *it;
    reject_unknown(s, "sweep", {"chunk_sizes", "overlap", "keep_going"});
    read(s, "chunk_sizes", cfg.chunk_sizes, "sweep");
    read(s, "overlap", cfg.overlap, "sweep");
    read(s, "keep_going", cfg.keep_going, "sweep");
  }

  std::string path;
  if (j.contains("cache_dir")) {
    read(j, "cache_dir", path, "config");
    cfg.cache_dir = path;
  }
  if (j.contains("output_dir")) {
    read(j, "output_dir", path, "config");
    cfg.output_dir = path;
  }
  return cfg;
}

inline AppConfig load_config(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error(ErrorCode::kInvalidConfig, "cannot open config " + path.string());
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kInvalidConfig, "config " + path.string() + " is not valid JSON: " + e.what());
  }
  return parse_config(j);
}

/// Live backends for one process. With a cache dir set, chat responses are
/// cached directly under it and remote embeddings under <cache>/embeddings.
struct Backends {
  std::shared_ptr<embed::Embedder> embedder;
  std::shared_ptr<llm::Generator> generator;
  std::shared_ptr<llm::CachedGenerator> chat_cache;  // null when caching is off
  std::unique_ptr<metrics::Judge> judge;
};

inline Backends make_backends(const AppConfig& cfg,
                              std::shared_ptr<http::Transport> transport = http::default_transport()) {
  cfg.validate();
  Backends b;

  if (cfg.embedder.kind == embed::EmbedderKind::kOffline) {
    b.embedder = std::make_shared<embed::OfflineEmbedder>(cfg.embedder.dim);
  } else {
    b.embedder = std::make_shared<embed::RemoteEmbedder>(cfg.embedder, transport);
    if (!cfg.cache_dir.empty()) {
      b.embedder = std::make_shared<embed::CachedEmbedder>(b.embedder, cfg.cache_dir / "embeddings");
    }
  }

  if (cfg.generator.kind == GeneratorKind::kMock) {
    b.generator = std::make_shared<llm::MockGenerator>();
  } else {
    b.generator = std::make_shared<llm::RemoteGenerator>(cfg.generator.remote, transport);
  }
  if (!cfg.cache_dir.empty()) {
    b.chat_cache = std::make_shared<llm::CachedGenerator>(b.generator, cfg.cache_dir);
    b.generator = b.chat_cache;
  }

  if (cfg.metric.judge == metrics::JudgeKind::kLexical) {
    b.judge = std::make_unique<metrics::LexicalJudge>(cfg.metric.jaccard_threshold);
  } else {
    b.judge = std::make_unique<metrics::RemoteJudge>(
        b.generator, cfg.judge_model.empty() ? cfg.generator.model() : cfg.judge_model);
  }
  return b;
}

}  // namespace ragbench::config
