#pragma once

// Chat-completion backends: OpenAI-compatible remote client, deterministic
// mock, and a content-addressed on-disk response cache.

#include <atomic>
#include <chrono>
#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "ragbench/atomic_file.hpp"
#include "ragbench/error.hpp"
#include "ragbench/hashing.hpp"
#include "ragbench/http.hpp"
#include "ragbench/utf8.hpp"

namespace ragbench::llm {

enum class Role { kSystem, kUser };

constexpr std::string_view to_string(Role r) { return r == Role::kSystem ? "system" : "user"; }

struct Message {
  Role role = Role::kUser;
  std::string content;

  friend bool operator==(const Message&, const Message&) = default;
};

struct ChatRequest {
  std::string model;
  std::vector<Message> messages;
  double temperature = 0.0;
  int max_tokens = 512;

  void validate() const {
    if (std::none_of(messages.begin(), messages.end(),
                     [](const Message& m) { return m.role == Role::kUser; })) {
      throw Error(ErrorCode::kInvalidConfig, "chat request needs at least one user message");
    }
    if (!(temperature >= 0.0)) throw Error(ErrorCode::kInvalidConfig, "temperature must be >= 0");
    if (max_tokens <= 0) throw Error(ErrorCode::kInvalidConfig, "max_tokens must be > 0");
  }

  const std::string& last_user_message() const {
    for (auto it = messages.rbegin(); it != messages.rend(); ++it) {
      if (it->role == Role::kUser) return it->content;
    }
    throw Error(ErrorCode::kInvalidConfig, "chat request has no user message");
  }
};

struct ChatResponse {
  std::string content;
  long long latency_ms = 0;
  bool cached = false;
};

inline nlohmann::json messages_json(const std::vector<Message>& messages) {
  auto arr = nlohmann::json::array();
  for (const auto& m : messages) arr.push_back({{"role", to_string(m.role)}, {"content", m.content}});
  return arr;
}

class Generator {
 public:
  virtual ~Generator() = default;
  virtual ChatResponse generate(const ChatRequest& req) = 0;
  /// Endpoint identity that goes into cache keys ("mock" for the mock).
  virtual std::string endpoint() const = 0;
};

inline constexpr std::string_view kMockPrefix = "MOCK-ANSWER: ";
inline constexpr std::size_t kMockMaxCodepoints = 2000;

/// Echoes the last user message behind a fixed prefix.
inline ChatResponse mock_generate(const ChatRequest& req) {
  req.validate();
  return {std::string(kMockPrefix) + utf8::truncate(req.last_user_message(), kMockMaxCodepoints), 0, false};
}

class MockGenerator final : public Generator {
 public:
  ChatResponse generate(const ChatRequest& req) override { return mock_generate(req); }
  std::string endpoint() const override { return "mock"; }
};

struct RemoteChatConfig {
  std::string endpoint_url;
  std::string model;
  std::size_t max_concurrency = 4;
  long long timeout_ms = 30000;
  int max_retries = 3;

  void validate() const {
    if (endpoint_url.empty() || model.empty()) {
      throw Error(ErrorCode::kInvalidConfig, "remote generator needs endpoint_url and model");
    }
    if (max_concurrency == 0) throw Error(ErrorCode::kInvalidConfig, "max_concurrency must be >= 1");
    if (timeout_ms <= 0) throw Error(ErrorCode::kInvalidConfig, "timeout_ms must be > 0");
    if (max_retries < 0) throw Error(ErrorCode::kInvalidConfig, "max_retries must be >= 0");
  }
};

/// choices[0].message.content, or ProtocolError / EmptyCompletion.
inline std::string parse_chat_response(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const std::exception& e) {
    throw Error(ErrorCode::kProtocolError, std::string("chat response is not JSON: ") + e.what());
  }
  if (!j.is_object() || !j.contains("choices") || !j["choices"].is_array()) {
    throw Error(ErrorCode::kProtocolError, "chat response lacks a 'choices' array");
  }
  if (j["choices"].empty()) throw Error(ErrorCode::kProtocolError, "chat response has no choices");
  const auto& choice = j["choices"][0];
  if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object()) {
    throw Error(ErrorCode::kProtocolError, "choices[0] lacks a message");
  }
  const auto& msg = choice["message"];
  if (!msg.contains("content") || !msg["content"].is_string()) {
    throw Error(ErrorCode::kProtocolError, "choices[0].message.content is not a string");
  }
  auto content = msg["content"].get<std::string>();
  if (content.empty()) throw Error(ErrorCode::kEmptyCompletion, "model returned an empty completion");
  return content;
}

class RemoteGenerator final : public Generator {
 public:
  explicit RemoteGenerator(RemoteChatConfig cfg,
                           std::shared_ptr<http::Transport> transport = http::default_transport(),
                           http::RetryPolicy retry = {})
      : cfg_(std::move(cfg)), transport_(std::move(transport)), retry_(std::move(retry)) {
    cfg_.validate();
    retry_.max_retries = cfg_.max_retries;
  }

  ChatResponse generate(const ChatRequest& req) override {
    req.validate();
    nlohmann::json body{{"model", req.model},
                        {"messages", messages_json(req.messages)},
                        {"temperature", req.temperature},
                        {"max_tokens", req.max_tokens}};
    const auto start = std::chrono::steady_clock::now();
    const auto resp =
        http::post_with_retry(*transport_, http::join_url(cfg_.endpoint_url, "/v1/chat/completions"),
                              body.dump(), std::chrono::milliseconds(cfg_.timeout_ms), retry_);
    ChatResponse out;
    out.content = parse_chat_response(resp.body);
    out.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                         std::chrono::steady_clock::now() - start)
                         .count();
    return out;
  }

  std::string endpoint() const override { return cfg_.endpoint_url; }
  const RemoteChatConfig& config() const { return cfg_; }

 private:
  RemoteChatConfig cfg_;
  std::shared_ptr<http::Transport> transport_;
  http::RetryPolicy retry_;
};

/// SHA-256 of the canonical (sorted-key, compact) JSON of the request
/// semantics. Identical requests always hash the same.
inline std::string request_key(std::string_view endpoint, const ChatRequest& req) {
  nlohmann::json canon{{"endpoint", endpoint},
                       {"model", req.model},
                       {"messages", messages_json(req.messages)},
                       {"temperature", req.temperature},
                       {"max_tokens", req.max_tokens}};
  return hashing::sha256_hex(canon.dump());
}

/// Cache files live at dir/<hex key> and hold {"request_key", "content"}.
class CachedGenerator final : public Generator {
 public:
  CachedGenerator(std::shared_ptr<Generator> inner, std::filesystem::path dir)
      : inner_(std::move(inner)), dir_(std::move(dir)) {
    std::error_code ec;
    std::filesystem::create_directories(dir_, ec);
    if (ec) throw Error(ErrorCode::kIoError, "cannot create cache dir " + dir_.string() + ": " + ec.message());
  }

  ChatResponse generate(const ChatRequest& req) override {
    req.validate();
    const auto key = request_key(inner_->endpoint(), req);
    if (auto hit = lookup(key)) return {std::move(*hit), 0, true};

    inner_calls_.fetch_add(1);
    auto resp = inner_->generate(req);
    nlohmann::json entry{{"request_key", key}, {"content", resp.content}};
    write_file_atomic(dir_ / key, entry.dump());
    resp.cached = false;
    return resp;
  }

  std::string endpoint() const override { return inner_->endpoint(); }

  /// Number of requests that missed the cache and reached the inner backend.
  std::size_t inner_calls() const { return inner_calls_.load(); }
  const std::filesystem::path& dir() const { return dir_; }

 private:
  std::optional<std::string> lookup(const std::string& key) const {
    std::ifstream in(dir_ / key, std::ios::binary);
    if (!in) return std::nullopt;
    try {
      const auto j = nlohmann::json::parse(in);
      if (j.at("request_key").get<std::string>() != key) return std::nullopt;
      auto content = j.at("content").get<std::string>();
      if (content.empty()) return std::nullopt;
      return content;
    } catch (const std::exception&) {
      return std::nullopt;  // corrupt entry: recompute and overwrite
    }
  }

  std::shared_ptr<Generator> inner_;
  std::filesystem::path dir_;
  std::atomic<std::size_t> inner_calls_{0};
};

}  // namespace ragbench::llm
