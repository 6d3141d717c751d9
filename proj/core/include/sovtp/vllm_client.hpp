/* Copyright 2026 The SoVTP Toolkit Authors.

Licensed under the Apache License, Version 2.0 (the "License");
you may not use this file except in compliance with the License.
You may obtain a copy of the License at

    http://www.apache.org/licenses/LICENSE-2.0

Unless required by applicable law or agreed to in writing, software
distributed under the License is distributed on an "AS IS" BASIS,
WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
See the License for the specific language governing permissions and
limitations under the License.
==============================================================================*/

#pragma once

#include <atomic>
#include <functional>
#include <map>
#include <memory>
#include <optional>
#include <stdexcept>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace sovtp {

struct ChatMessage {
  std::string role;                 // "system" | "user" | "assistant"
  std::string text;
  std::vector<std::string> images;  // base64-encoded PNG payloads
};

struct ChatRequest {
  std::string model;
  std::vector<ChatMessage> messages;
  int max_tokens = 1024;
  double temperature = 0.0;
  // Routing hint for scripted backends (1-based chain stage, 0 = none).
  // Never sent on the wire.
  int stage_index = 0;
};

// Chat-completions JSON body with sorted keys; identical requests produce
// identical bytes.
std::string serialize_request(const ChatRequest& req);
std::string request_hash(const ChatRequest& req);
// Hash of the last message's text; used as a stub-script key.
std::string prompt_hash(const ChatRequest& req);

enum class BackendErrorKind { kTransport, kTimeout, kProtocol, kAuth };

std::string_view to_string(BackendErrorKind kind) noexcept;

class BackendError : public std::runtime_error {
 public:
  BackendError(BackendErrorKind kind, const std::string& what, int http_status = 0);

  BackendErrorKind kind() const noexcept { return kind_; }
  int http_status() const noexcept { return http_status_; }
  // Auth rejections are final; everything else may be retried.
  bool retryable() const noexcept { return kind_ != BackendErrorKind::kAuth; }

 private:
  BackendErrorKind kind_;
  int http_status_;
};

// First choice's message text. Throws BackendError(kProtocol) on schema violations.
std::string parse_response_text(std::string_view body);

struct RetryPolicy {
  int max_attempts = 3;
  double backoff_base_seconds = 1.0;
  double backoff_max_seconds = 30.0;

  // Delay before retry number `retry` (1-based): base * 2^(retry-1), capped.
  double delay_before_retry(int retry) const;
  void validate() const;
};

using Sleeper = std::function<void(double seconds)>;
using MonotonicClock = std::function<double()>;  // seconds

Sleeper real_sleeper();
MonotonicClock steady_clock_seconds();

// Runs `call` until it succeeds, a non-retryable BackendError is thrown, or
// the policy's attempts are exhausted (the last error is rethrown).
// `on_failure` observes each failed attempt.
template <class Call>
auto call_with_retries(const RetryPolicy& policy, const Sleeper& sleep, Call&& call,
                       const std::function<void(int attempt, const BackendError&)>& on_failure = {}) {
  for (int attempt = 1;; ++attempt) {
    try {
      return call(attempt);
    } catch (const BackendError& e) {
      if (on_failure) on_failure(attempt, e);
      if (!e.retryable() || attempt >= policy.max_attempts) throw;
      if (sleep) sleep(policy.delay_before_retry(attempt));
    }
  }
}

struct BackendConfig {
  std::string endpoint;                    // full chat-completions URL
  std::string model;
  std::string token_env = "SOVTP_API_TOKEN";  // bearer token source
  double timeout_seconds = 120.0;
  RetryPolicy retry;

  void validate() const;
};

struct Completion {
  std::string text;
  double latency_seconds = 0.0;
  int attempts = 1;
};

class Backend {
 public:
  virtual ~Backend() = default;
  // Safe to call concurrently.
  virtual Completion complete(const ChatRequest& req) = 0;
  virtual std::string describe() const = 0;
};

struct HttpResponse {
  int status = 0;
  std::string body;
};

using HttpHeaders = std::vector<std::pair<std::string, std::string>>;

class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  // Throws BackendError (kTransport / kTimeout) when no response arrives.
  virtual HttpResponse post(const std::string& url, const std::string& body,
                            const HttpHeaders& headers, double timeout_seconds) = 0;
};

std::shared_ptr<HttpTransport> make_http_transport();

class ChatCompletionsBackend : public Backend {
 public:
  explicit ChatCompletionsBackend(BackendConfig cfg,
                                  std::shared_ptr<HttpTransport> transport = make_http_transport(),
                                  Sleeper sleep = real_sleeper(),
                                  MonotonicClock clock = steady_clock_seconds());

  Completion complete(const ChatRequest& req) override;
  std::string describe() const override;
  const BackendConfig& config() const noexcept { return cfg_; }

 private:
  BackendConfig cfg_;
  std::shared_ptr<HttpTransport> transport_;
  Sleeper sleep_;
  MonotonicClock clock_;
};

struct StubReply {
  std::string text;
  std::optional<BackendErrorKind> failure;  // fail every call with this kind
  double latency_seconds = 0.0;             // reported, not slept
};

inline constexpr std::string_view kUnscriptedReply = "UNSCRIPTED";

// Deterministic offline backend. Keys are a stage index ("1".."5") or
// "sha256:<prompt hash>"; a prompt-hash key wins over a stage key.
class StubBackend : public Backend {
 public:
  explicit StubBackend(std::map<std::string, StubReply> script);

  // {"1": "reply", "5": {"text": "...", "latency_seconds": 0.5}, "3": {"fail": "transport"}}
  static std::unique_ptr<StubBackend> from_json(std::string_view json_text);
  static std::unique_ptr<StubBackend> load(const std::string& path);

  Completion complete(const ChatRequest& req) override;
  std::string describe() const override;
  long calls() const noexcept { return calls_.load(); }

 private:
  std::map<std::string, StubReply> script_;
  std::atomic<long> calls_{0};
};

}  // namespace sovtp
