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

#include <gtest/gtest.h>

#include <httplib.h>
#include <json.hpp>

#include <atomic>
#include <cstdlib>
#include <deque>
#include <thread>

#include "sovtp/encoding.hpp"
#include "sovtp/errors.hpp"
#include "sovtp/vllm_client.hpp"

namespace sovtp {
namespace {

using nlohmann::json;

ChatRequest request(const std::string& text = "X", int stage = 0) {
  ChatRequest r;
  r.model = "m";
  r.messages = {{"system", "sys", {}}, {"user", text, {"AAAA"}}};
  r.stage_index = stage;
  return r;
}

std::string chat_body(const std::string& text) {
  return json{{"id", "x"}, {"choices", {{{"index", 0}, {"message", {{"role", "assistant"}, {"content", text}}}}}}}.dump();
}

TEST(Serialize, CanonicalAndComplete) {
  const auto body = serialize_request(request());
  EXPECT_EQ(body, serialize_request(request()));
  const auto doc = json::parse(body);
  EXPECT_EQ(doc.dump(), body);  // keys already sorted
  EXPECT_EQ(doc["model"], "m");
  EXPECT_EQ(doc["max_tokens"], 1024);
  EXPECT_EQ(doc["temperature"], 0.0);
  EXPECT_EQ(doc["messages"][1]["content"][1]["image_url"]["url"], "data:image/png;base64,AAAA");
  EXPECT_EQ(body.find("stage"), std::string::npos);

  auto staged = request();
  staged.stage_index = 4;
  EXPECT_EQ(serialize_request(staged), body);
  EXPECT_EQ(request_hash(staged), sha256_hex(body));
  EXPECT_EQ(prompt_hash(staged), sha256_hex("X"));
}

TEST(Serialize, Preconditions) {
  ChatRequest empty;
  EXPECT_THROW(serialize_request(empty), ContractViolation);
  auto r = request();
  r.max_tokens = 0;
  EXPECT_THROW(serialize_request(r), ContractViolation);
  r = request();
  r.temperature = -1;
  EXPECT_THROW(serialize_request(r), ContractViolation);
}

TEST(ParseResponse, ShapesAndErrors) {
  EXPECT_EQ(parse_response_text(chat_body("hello")), "hello");
  const json parts = {{"choices", {{{"message", {{"content", {{{"type", "text"}, {"text", "a"}}, {{"type", "text"}, {"text", "b"}}}}}}}}}};
  EXPECT_EQ(parse_response_text(parts.dump()), "ab");
  for (const std::string bad : {"<html>", "{}", R"({"choices":[]})", R"({"choices":[{"text":"x"}]})",
                                R"({"choices":[{"message":{"content":null}}]})"}) {
    try {
      parse_response_text(bad);
      FAIL() << bad;
    } catch (const BackendError& e) {
      EXPECT_EQ(e.kind(), BackendErrorKind::kProtocol) << bad;
    }
  }
}

TEST(RetryPolicy, DelaysDoubleUpToCap) {
  RetryPolicy p{6, 0.5, 3.0};
  std::vector<double> delays;
  for (int i = 1; i <= 6; ++i) delays.push_back(p.delay_before_retry(i));
  EXPECT_EQ(delays, (std::vector<double>{0.5, 1.0, 2.0, 3.0, 3.0, 3.0}));
  EXPECT_THROW((RetryPolicy{0, 1, 1}.validate()), ContractViolation);
}

TEST(RetryPolicy, NeverExceedsAttemptsAndBackoffNonDecreasing) {
  for (int attempts = 1; attempts <= 6; ++attempts) {
    RetryPolicy p{attempts, 0.25, 2.0};
    std::vector<double> slept;
    int calls = 0;
    EXPECT_THROW(call_with_retries(p, [&](double s) { slept.push_back(s); },
                                   [&](int) -> int {
                                     ++calls;
                                     throw BackendError(BackendErrorKind::kTimeout, "slow");
                                   }),
                 BackendError);
    EXPECT_EQ(calls, attempts);
    EXPECT_EQ(slept.size(), static_cast<std::size_t>(attempts - 1));
    EXPECT_TRUE(std::is_sorted(slept.begin(), slept.end()));
  }
}

TEST(RetryPolicy, AuthErrorsAreNotRetried) {
  int calls = 0;
  EXPECT_THROW(call_with_retries(RetryPolicy{5, 0, 0}, {},
                                 [&](int) -> int {
                                   ++calls;
                                   throw BackendError(BackendErrorKind::kAuth, "no", 401);
                                 }),
               BackendError);
  EXPECT_EQ(calls, 1);
}

TEST(Stub, ScriptedUnscriptedAndHashKeys) {
  auto stub = StubBackend::from_json(json{{"1", "a kitchen scene"},
                                          {"sha256:" + sha256_hex("special"), "by hash"},
                                          {"2", {{"text", "slow"}, {"latency_seconds", 2.5}}}}
                                         .dump());
  EXPECT_EQ(stub->complete(request("q", 1)).text, "a kitchen scene");
  EXPECT_EQ(stub->complete(request("q", 3)).text, "UNSCRIPTED");
  EXPECT_EQ(stub->complete(request("special", 1)).text, "by hash");
  const auto c = stub->complete(request("q", 2));
  EXPECT_EQ(c.text, "slow");
  EXPECT_EQ(c.latency_seconds, 2.5);
  EXPECT_EQ(stub->calls(), 4);
}

TEST(Stub, ScriptValidation) {
  EXPECT_THROW(StubBackend(std::map<std::string, StubReply>{}), ContractViolation);
  EXPECT_THROW(StubBackend::from_json("{}"), DataError);
  EXPECT_THROW(StubBackend::from_json("[1]"), DataError);
  EXPECT_THROW(StubBackend::from_json(R"({"1": 5})"), DataError);
  EXPECT_THROW(StubBackend::from_json(R"({"1": {"fail": "meteor"}})"), DataError);
  EXPECT_THROW(StubBackend::load("/nonexistent/stub.json"), DataError);
  auto failing = StubBackend::from_json(R"({"1": {"fail": "auth"}})");
  try {
    failing->complete(request("q", 1));
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendErrorKind::kAuth);
    EXPECT_FALSE(e.retryable());
  }
}

class FakeTransport : public HttpTransport {
 public:
  std::deque<std::function<HttpResponse()>> script;
  std::vector<HttpHeaders> seen_headers;
  std::vector<std::string> seen_bodies;
  HttpResponse post(const std::string&, const std::string& body, const HttpHeaders& headers, double) override {
    seen_headers.push_back(headers);
    seen_bodies.push_back(body);
    auto next = script.front();
    if (script.size() > 1) script.pop_front();
    return next();
  }
};

BackendConfig config(int attempts) {
  BackendConfig c;
  c.endpoint = "http://example.invalid/v1/chat/completions";
  c.model = "fallback-model";
  c.token_env = "SOVTP_TEST_TOKEN";
  c.retry = {attempts, 1.0, 4.0};
  return c;
}

TEST(ChatCompletions, RetriesTransientFailuresWithBackoff) {
  auto t = std::make_shared<FakeTransport>();
  t->script = {[] { return HttpResponse{503, "busy"}; }, [] { return HttpResponse{200, "not json"}; },
               [] { return HttpResponse{200, chat_body("ok")}; }};
  std::vector<double> slept;
  double now = 100.0;
  ChatCompletionsBackend b(config(3), t, [&](double s) { slept.push_back(s); now += s; }, [&] { return now; });
  const auto c = b.complete(request());
  EXPECT_EQ(c.text, "ok");
  EXPECT_EQ(c.attempts, 3);
  EXPECT_EQ(slept, (std::vector<double>{1.0, 2.0}));
  EXPECT_DOUBLE_EQ(c.latency_seconds, 3.0);
}

TEST(ChatCompletions, GivesUpAfterConfiguredAttempts) {
  auto t = std::make_shared<FakeTransport>();
  t->script = {[]() -> HttpResponse { throw BackendError(BackendErrorKind::kTransport, "refused"); }};
  ChatCompletionsBackend b(config(2), t, [](double) {}, [] { return 0.0; });
  try {
    b.complete(request());
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendErrorKind::kTransport);
  }
  EXPECT_EQ(t->seen_bodies.size(), 2u);
}

TEST(ChatCompletions, StatusMapping) {
  for (int status : {401, 403}) {
    auto t = std::make_shared<FakeTransport>();
    t->script = {[status] { return HttpResponse{status, ""}; }};
    ChatCompletionsBackend b(config(5), t, [](double) {}, [] { return 0.0; });
    try {
      b.complete(request());
      FAIL();
    } catch (const BackendError& e) {
      EXPECT_EQ(e.kind(), BackendErrorKind::kAuth);
      EXPECT_EQ(e.http_status(), status);
    }
    EXPECT_EQ(t->seen_bodies.size(), 1u);
  }
  auto t = std::make_shared<FakeTransport>();
  t->script = {[] { return HttpResponse{429, "slow down"}; }};
  ChatCompletionsBackend b(config(3), t, [](double) {}, [] { return 0.0; });
  try {
    b.complete(request());
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendErrorKind::kTransport);
    EXPECT_EQ(e.http_status(), 429);
  }
  EXPECT_EQ(t->seen_bodies.size(), 3u);
}

TEST(ChatCompletions, BearerTokenFromEnvironmentAndDefaultModel) {
  ::setenv("SOVTP_TEST_TOKEN", "s3cret", 1);
  auto t = std::make_shared<FakeTransport>();
  t->script = {[] { return HttpResponse{200, chat_body("ok")}; }};
  ChatCompletionsBackend b(config(1), t, [](double) {}, [] { return 0.0; });
  auto r = request();
  r.model.clear();
  b.complete(r);
  ::unsetenv("SOVTP_TEST_TOKEN");
  b.complete(r);
  const auto& with = t->seen_headers[0];
  EXPECT_NE(std::find(with.begin(), with.end(), std::pair<std::string, std::string>{"Authorization", "Bearer s3cret"}),
            with.end());
  for (const auto& [k, v] : t->seen_headers[1]) EXPECT_NE(k, "Authorization");
  EXPECT_EQ(json::parse(t->seen_bodies[0])["model"], "fallback-model");
}

TEST(ChatCompletions, ConfigValidation) {
  auto c = config(1);
  c.timeout_seconds = 0;
  EXPECT_THROW(ChatCompletionsBackend(c, std::make_shared<FakeTransport>()), ContractViolation);
  c = config(1);
  c.endpoint.clear();
  EXPECT_THROW(ChatCompletionsBackend(c, std::make_shared<FakeTransport>()), ContractViolation);
}

class LocalServer {
 public:
  LocalServer() {
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LocalServer() {
    server_.stop();
    thread_.join();
  }
  httplib::Server& server() { return server_; }
  std::string url(const std::string& path) const { return "http://127.0.0.1:" + std::to_string(port_) + path; }

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST(HttpTransport, RoundTripAgainstLocalServer) {
  std::atomic<int> hits{0};
  std::string seen_auth, seen_body;
  auto server = std::make_unique<LocalServer>();
  server->server().Post("/v1/chat/completions", [&](const httplib::Request& req, httplib::Response& res) {
    if (hits++ == 0) {
      res.status = 500;
      return;
    }
    seen_auth = req.get_header_value("Authorization");
    seen_body = req.body;
    res.set_content(chat_body("REASONING: r\nANSWER: Happy"), "application/json");
  });
  ::setenv("SOVTP_TEST_TOKEN", "tok", 1);
  auto cfg = config(2);
  cfg.endpoint = server->url("/v1/chat/completions");
  cfg.timeout_seconds = 5;
  ChatCompletionsBackend b(cfg, make_http_transport(), [](double) {});
  const auto c = b.complete(request());
  ::unsetenv("SOVTP_TEST_TOKEN");
  EXPECT_EQ(c.text, "REASONING: r\nANSWER: Happy");
  EXPECT_EQ(c.attempts, 2);
  EXPECT_EQ(seen_auth, "Bearer tok");
  EXPECT_EQ(seen_body, serialize_request(request()));
}

TEST(HttpTransport, SlowServerTimesOut) {
  LocalServer server;
  server.server().Post("/slow", [](const httplib::Request&, httplib::Response& res) {
    std::this_thread::sleep_for(std::chrono::milliseconds(600));
    res.set_content(chat_body("late"), "application/json");
  });
  try {
    make_http_transport()->post(server.url("/slow"), "{}", {}, 0.15);
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendErrorKind::kTimeout);
  }
}

TEST(HttpTransport, UnreachableEndpointIsTransportErrorAfterAllAttempts) {
  int sleeps = 0;
  auto cfg = config(2);
  cfg.endpoint = "http://127.0.0.1:1/v1/chat/completions";
  cfg.timeout_seconds = 2;
  ChatCompletionsBackend b(cfg, make_http_transport(), [&](double) { ++sleeps; });
  try {
    b.complete(request());
    FAIL();
  } catch (const BackendError& e) {
    EXPECT_EQ(e.kind(), BackendErrorKind::kTransport);
  }
  EXPECT_EQ(sleeps, 1);
}

}  // namespace
}  // namespace sovtp
