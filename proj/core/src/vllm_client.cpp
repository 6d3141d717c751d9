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

#include "sovtp/vllm_client.hpp"

#include <chrono>
#include <cmath>
#include <cstdlib>
#include <fstream>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "sovtp/encoding.hpp"
#include "sovtp/errors.hpp"

namespace sovtp {

using nlohmann::json;

std::string serialize_request(const ChatRequest& req) {
  if (req.messages.empty()) throw ContractViolation("chat request needs at least one message");
  if (req.max_tokens <= 0) throw ContractViolation("max_tokens must be positive");
  if (!(req.temperature >= 0.0)) throw ContractViolation("temperature must be non-negative");

  json messages = json::array();
  for (const auto& m : req.messages) {
    json content = json::array();
    content.push_back({{"type", "text"}, {"text", m.text}});
    for (const auto& img : m.images) {
      content.push_back(
          {{"type", "image_url"}, {"image_url", {{"url", "data:image/png;base64," + img}}}});
    }
    messages.push_back({{"role", m.role}, {"content", content}});
  }
  json body = {
      {"model", req.model},
      {"messages", messages},
      {"max_tokens", req.max_tokens},
      {"temperature", req.temperature},
      {"stream", false},
  };
  return body.dump();
}

std::string request_hash(const ChatRequest& req) { return sha256_hex(serialize_request(req)); }

std::string prompt_hash(const ChatRequest& req) {
  return req.messages.empty() ? sha256_hex("") : sha256_hex(req.messages.back().text);
}

std::string_view to_string(BackendErrorKind kind) noexcept {
  switch (kind) {
    case BackendErrorKind::kTransport: return "transport";
    case BackendErrorKind::kTimeout: return "timeout";
    case BackendErrorKind::kProtocol: return "protocol";
    case BackendErrorKind::kAuth: return "auth";
  }
  return "unknown";
}

BackendError::BackendError(BackendErrorKind kind, const std::string& what, int http_status)
    : std::runtime_error(std::string(to_string(kind)) + " error: " + what),
      kind_(kind),
      http_status_(http_status) {}

std::string parse_response_text(std::string_view body) {
  json doc;
  try {
    doc = json::parse(body);
  } catch (const json::parse_error&) {
    throw BackendError(BackendErrorKind::kProtocol, "response body is not JSON");
  }
  if (!doc.is_object() || !doc.contains("choices") || !doc["choices"].is_array() ||
      doc["choices"].empty()) {
    throw BackendError(BackendErrorKind::kProtocol, "response has no choices");
  }
  const auto& choice = doc["choices"][0];
  if (!choice.is_object() || !choice.contains("message") || !choice["message"].is_object()) {
    throw BackendError(BackendErrorKind::kProtocol, "first choice has no message");
  }
  const auto& content = choice["message"].contains("content") ? choice["message"]["content"] : json();
  if (content.is_string()) return content.get<std::string>();
  if (content.is_array()) {
    std::string text;
    bool any = false;
    for (const auto& part : content) {
      if (part.is_object() && part.value("type", "") == "text" && part.contains("text") &&
          part["text"].is_string()) {
        text += part["text"].get<std::string>();
        any = true;
      }
    }
    if (any) return text;
  }
  throw BackendError(BackendErrorKind::kProtocol, "message content has no text");
}

double RetryPolicy::delay_before_retry(int retry) const {
  const double d = backoff_base_seconds * std::pow(2.0, std::max(0, retry - 1));
  return std::min(d, backoff_max_seconds);
}

void RetryPolicy::validate() const {
  if (max_attempts < 1) throw ContractViolation("retry policy: attempts must be >= 1");
  if (backoff_base_seconds < 0.0 || backoff_max_seconds < 0.0) {
    throw ContractViolation("retry policy: backoff must be non-negative");
  }
}

Sleeper real_sleeper() {
  return [](double seconds) {
    if (seconds > 0.0) std::this_thread::sleep_for(std::chrono::duration<double>(seconds));
  };
}

MonotonicClock steady_clock_seconds() {
  return [] {
    return std::chrono::duration<double>(std::chrono::steady_clock::now().time_since_epoch())
        .count();
  };
}

void BackendConfig::validate() const {
  if (endpoint.empty()) throw ContractViolation("backend endpoint URL is empty");
  if (!(timeout_seconds > 0.0)) throw ContractViolation("backend timeout must be positive");
  retry.validate();
}

ChatCompletionsBackend::ChatCompletionsBackend(BackendConfig cfg,
                                               std::shared_ptr<HttpTransport> transport,
                                               Sleeper sleep, MonotonicClock clock)
    : cfg_(std::move(cfg)),
      transport_(std::move(transport)),
      sleep_(std::move(sleep)),
      clock_(std::move(clock)) {
  cfg_.validate();
  if (!transport_) throw ContractViolation("backend needs an HTTP transport");
}

Completion ChatCompletionsBackend::complete(const ChatRequest& req) {
  ChatRequest wire = req;
  if (wire.model.empty()) wire.model = cfg_.model;
  const std::string body = serialize_request(wire);

  HttpHeaders headers = {{"Content-Type", "application/json"}};
  if (!cfg_.token_env.empty()) {
    if (const char* token = std::getenv(cfg_.token_env.c_str()); token != nullptr && *token) {
      headers.emplace_back("Authorization", std::string("Bearer ") + token);
    }
  }

  const double start = clock_();
  int attempts = 0;
  std::string text = call_with_retries(cfg_.retry, sleep_, [&](int attempt) {
    attempts = attempt;
    HttpResponse res = transport_->post(cfg_.endpoint, body, headers, cfg_.timeout_seconds);
    if (res.status == 401 || res.status == 403) {
      throw BackendError(BackendErrorKind::kAuth, "endpoint rejected credentials", res.status);
    }
    if (res.status < 200 || res.status >= 300) {
      throw BackendError(BackendErrorKind::kTransport,
                         "HTTP status " + std::to_string(res.status), res.status);
    }
    return parse_response_text(res.body);
  });
  return {std::move(text), clock_() - start, attempts};
}

std::string ChatCompletionsBackend::describe() const {
  return "chat-completions " + cfg_.endpoint + " model=" + cfg_.model;
}

StubBackend::StubBackend(std::map<std::string, StubReply> script) : script_(std::move(script)) {
  if (script_.empty()) throw ContractViolation("stub backend script must not be empty");
}

std::unique_ptr<StubBackend> StubBackend::from_json(std::string_view json_text) {
  json doc;
  try {
    doc = json::parse(json_text);
  } catch (const json::parse_error& e) {
    throw DataError(std::string("stub script: malformed JSON: ") + e.what());
  }
  if (!doc.is_object()) throw DataError("stub script must be a JSON object");
  std::map<std::string, StubReply> script;
  for (const auto& [key, value] : doc.items()) {
    StubReply reply;
    if (value.is_string()) {
      reply.text = value.get<std::string>();
    } else if (value.is_object()) {
      reply.text = value.value("text", "");
      reply.latency_seconds = value.value("latency_seconds", 0.0);
      if (value.contains("fail")) {
        const std::string kind = value["fail"].get<std::string>();
        if (kind == "transport") reply.failure = BackendErrorKind::kTransport;
        else if (kind == "timeout") reply.failure = BackendErrorKind::kTimeout;
        else if (kind == "protocol") reply.failure = BackendErrorKind::kProtocol;
        else if (kind == "auth") reply.failure = BackendErrorKind::kAuth;
        else throw DataError("stub script: unknown failure kind '" + kind + "'");
      }
    } else {
      throw DataError("stub script: entry '" + key + "' must be a string or object");
    }
    script.emplace(key, std::move(reply));
  }
  if (script.empty()) throw DataError("stub script is empty");
  return std::make_unique<StubBackend>(std::move(script));
}

std::unique_ptr<StubBackend> StubBackend::load(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError("cannot open stub script " + path);
  std::ostringstream buf;
  buf << in.rdbuf();
  return from_json(buf.str());
}

Completion StubBackend::complete(const ChatRequest& req) {
  ++calls_;
  serialize_request(req);  // same preconditions as a real endpoint
  const StubReply* reply = nullptr;
  if (auto it = script_.find("sha256:" + prompt_hash(req)); it != script_.end()) {
    reply = &it->second;
  } else if (auto st = script_.find(std::to_string(req.stage_index)); st != script_.end()) {
    reply = &st->second;
  }
  if (reply == nullptr) return {std::string(kUnscriptedReply), 0.0, 1};
  if (reply->failure) {
    throw BackendError(*reply->failure, "scripted failure at stage " + std::to_string(req.stage_index));
  }
  return {reply->text, reply->latency_seconds, 1};
}

std::string StubBackend::describe() const {
  return "stub (" + std::to_string(script_.size()) + " scripted replies)";
}

}  // namespace sovtp
