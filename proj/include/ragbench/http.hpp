#pragma once

// JSON-over-HTTP POST with the retry/backoff contract shared by the remote
// embedder and the chat client.

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <functional>
#include <memory>
#include <string>
#include <thread>
#include <utility>
#include <vector>

#include <httplib.h>

#include "ragbench/error.hpp"

namespace ragbench::http {

using Headers = std::vector<std::pair<std::string, std::string>>;

struct Response {
  int status = 0;
  std::string body;
};

/// Transport failures surface as Error{kTimeout} or Error{kNetworkError};
/// any HTTP status (including 4xx/5xx) is returned, not thrown.
class Transport {
 public:
  virtual ~Transport() = default;
  virtual Response post(const std::string& url, const std::string& body, const Headers& headers,
                        std::chrono::milliseconds timeout) = 0;
};

struct SplitUrl {
  std::string origin;  // scheme://host[:port]
  std::string path;    // always starts with '/'
};

inline SplitUrl split_url(const std::string& url) {
  const auto scheme_end = url.find("://");
  if (scheme_end == std::string::npos) {
    throw Error(ErrorCode::kInvalidConfig, "endpoint URL needs a scheme: " + url);
  }
  const auto scheme = url.substr(0, scheme_end);
  if (scheme != "http" && scheme != "https") {
    throw Error(ErrorCode::kInvalidConfig, "unsupported URL scheme: " + url);
  }
  const auto path_start = url.find('/', scheme_end + 3);
  if (path_start == std::string::npos) return {url, "/"};
  return {url.substr(0, path_start), url.substr(path_start)};
}

/// `endpoint` + `route`, with exactly one slash between them.
inline std::string join_url(std::string endpoint, std::string_view route) {
  while (!endpoint.empty() && endpoint.back() == '/') endpoint.pop_back();
  return endpoint + std::string(route);
}

class HttplibTransport final : public Transport {
 public:
  Response post(const std::string& url, const std::string& body, const Headers& headers,
                std::chrono::milliseconds timeout) override {
    const auto parts = split_url(url);
    httplib::Client client(parts.origin);
    const auto secs = timeout.count() / 1000;
    const auto usecs = (timeout.count() % 1000) * 1000;
    client.set_connection_timeout(secs, usecs);
    client.set_read_timeout(secs, usecs);
    client.set_write_timeout(secs, usecs);

    httplib::Headers hdrs;
    for (const auto& [k, v] : headers) hdrs.emplace(k, v);
    auto result = client.Post(parts.path, hdrs, body, "application/json");
    if (!result) {
      const auto err = result.error();
      const auto what = httplib::to_string(err);
      if (err == httplib::Error::ConnectionTimeout || err == httplib::Error::Read ||
          err == httplib::Error::Write) {
        // httplib reports an expired read/write deadline as Read/Write.
        throw Error(ErrorCode::kTimeout, "POST " + url + ": " + what);
      }
      throw Error(ErrorCode::kNetworkError, "POST " + url + ": " + what);
    }
    return {result->status, result->body};
  }
};

inline std::shared_ptr<Transport> default_transport() {
  static auto instance = std::make_shared<HttplibTransport>();
  return instance;
}

/// Exponential backoff: delay(attempt) = base * factor^attempt, for
/// attempt = 0 .. max_retries-1.
struct RetryPolicy {
  int max_retries = 3;
  std::chrono::milliseconds base_delay{500};
  double factor = 2.0;
  std::function<void(std::chrono::milliseconds)> sleep = [](std::chrono::milliseconds d) {
    std::this_thread::sleep_for(d);
  };

  std::chrono::milliseconds delay(int attempt) const {
    return std::chrono::milliseconds(
        static_cast<long long>(static_cast<double>(base_delay.count()) * std::pow(factor, attempt)));
  }
};

inline bool is_retryable_status(int status) { return status == 429 || (status >= 500 && status <= 599); }

/// Bearer token from RAGBENCH_API_KEY, when set.
inline Headers auth_headers() {
  Headers h;
  if (const char* key = std::getenv("RAGBENCH_API_KEY"); key != nullptr && *key != '\0') {
    h.emplace_back("Authorization", std::string("Bearer ") + key);
  }
  return h;
}

/// POSTs until a 2xx arrives. 429/5xx and transport failures are retried
/// with backoff; other statuses are ProtocolErrors. Exhausting retries on a
/// status yields RateLimitedExhausted, on a transport failure the last
/// transport error.
inline Response post_with_retry(Transport& transport, const std::string& url, const std::string& body,
                                std::chrono::milliseconds timeout, const RetryPolicy& policy) {
  const auto headers = auth_headers();
  for (int attempt = 0;; ++attempt) {
    const bool can_retry = attempt < policy.max_retries;
    Response resp;
    try {
      resp = transport.post(url, body, headers, timeout);
    } catch (const Error& e) {
      if (!can_retry ||
          (e.code() != ErrorCode::kTimeout && e.code() != ErrorCode::kNetworkError)) {
        throw;
      }
      policy.sleep(policy.delay(attempt));
      continue;
    }
    if (resp.status >= 200 && resp.status < 300) return resp;
    if (!is_retryable_status(resp.status)) {
      throw Error(ErrorCode::kProtocolError, "POST " + url + " returned HTTP " +
                                                 std::to_string(resp.status) + ": " +
                                                 resp.body.substr(0, 200));
    }
    if (!can_retry) {
      throw Error(ErrorCode::kRateLimitedExhausted,
                  "POST " + url + " still HTTP " + std::to_string(resp.status) + " after " +
                      std::to_string(attempt + 1) + " attempts");
    }
    policy.sleep(policy.delay(attempt));
  }
}

}  // namespace ragbench::http
