// Copyright 2026 The RAG Audit Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "ragaudit/remote.h"

#include <chrono>
#include <deque>
#include <memory>
#include <string>
#include <thread>
#include <vector>

#include "gtest/gtest.h"
#include "httplib.h"
#include "json.hpp"
#include "test_util.h"

namespace ragaudit {
namespace {

using nlohmann::json;

// Replays a scripted list of outcomes and remembers what it was sent.
class FakeTransport final : public HttpTransport {
 public:
  explicit FakeTransport(std::deque<absl::StatusOr<HttpResponse>> script)
      : script_(std::move(script)) {}

  absl::StatusOr<HttpResponse> Post(
      const std::string& path, const std::string& body,
      const std::map<std::string, std::string>& headers) override {
    paths.push_back(path);
    bodies.push_back(body);
    last_headers = headers;
    return Next();
  }
  absl::StatusOr<HttpResponse> Get(
      const std::string& path,
      const std::map<std::string, std::string>& headers) override {
    paths.push_back(path);
    last_headers = headers;
    return Next();
  }

  std::vector<std::string> paths;
  std::vector<std::string> bodies;
  std::map<std::string, std::string> last_headers;

 private:
  absl::StatusOr<HttpResponse> Next() {
    if (script_.empty()) return absl::InternalError("script exhausted");
    auto r = script_.front();
    script_.pop_front();
    return r;
  }
  std::deque<absl::StatusOr<HttpResponse>> script_;
};

RetryPolicy NoSleep(std::vector<std::chrono::milliseconds>* slept = nullptr) {
  RetryPolicy p;
  p.sleep = [slept](std::chrono::milliseconds d) {
    if (slept != nullptr) slept->push_back(d);
  };
  return p;
}

HttpResponse Ok(const json& body) { return {200, body.dump()}; }

TEST(StatusFromHttpTest, Mapping) {
  EXPECT_OK(StatusFromHttp({200, ""}));
  EXPECT_OK(StatusFromHttp({204, ""}));
  EXPECT_EQ(StatusFromHttp({429, ""}).code(), absl::StatusCode::kUnavailable);
  EXPECT_EQ(StatusFromHttp({503, ""}).code(), absl::StatusCode::kUnavailable);
  EXPECT_EQ(StatusFromHttp({401, ""}).code(), absl::StatusCode::kPermissionDenied);
  EXPECT_EQ(StatusFromHttp({403, ""}).code(), absl::StatusCode::kPermissionDenied);
  EXPECT_EQ(StatusFromHttp({400, "bad"}).code(), absl::StatusCode::kInvalidArgument);
  EXPECT_TRUE(IsRetryable(absl::DeadlineExceededError("")));
  EXPECT_FALSE(IsRetryable(absl::PermissionDeniedError("")));
}

TEST(CallWithRetryTest, BackoffDoublesAndCaps) {
  std::vector<std::chrono::milliseconds> slept;
  RetryPolicy p = NoSleep(&slept);
  p.max_attempts = 6;
  p.initial_backoff = std::chrono::milliseconds(1000);
  int calls = 0;
  auto r = CallWithRetry<int>(
      [&]() -> absl::StatusOr<int> {
        ++calls;
        return absl::UnavailableError("down");
      },
      p);
  EXPECT_EQ(r.status().code(), absl::StatusCode::kUnavailable);
  EXPECT_EQ(calls, 6);
  using ms = std::chrono::milliseconds;
  EXPECT_EQ(slept, (std::vector<ms>{ms(1000), ms(2000), ms(4000), ms(4000),
                                    ms(4000)}));
}

TEST(HttpGeneratorTest, TwoTimeoutsThenSuccessTakesThreeAttempts) {
  auto fake = std::make_unique<FakeTransport>(
      std::deque<absl::StatusOr<HttpResponse>>{
          absl::DeadlineExceededError("t1"), absl::DeadlineExceededError("t2"),
          Ok({{"text", "Yes"}})});
  FakeTransport* raw = fake.get();
  HttpGeneratorOptions opts;
  opts.retry = NoSleep();
  HttpGenerator gen(std::move(fake), opts);
  ASSERT_OK_AND_ASSIGN(GenerationResult r, gen.Generate("p", {}));
  EXPECT_EQ(r.text, "Yes");
  EXPECT_EQ(raw->paths.size(), 3u);
  auto log = gen.attempt_log();
  ASSERT_EQ(log.size(), 3u);
  EXPECT_EQ(log[2].attempt, 3);
  EXPECT_EQ(log[2].outcome, "ok");
}

TEST(HttpGeneratorTest, PermanentErrorIsNotRetried) {
  auto fake = std::make_unique<FakeTransport>(
      std::deque<absl::StatusOr<HttpResponse>>{HttpResponse{401, "no"}});
  FakeTransport* raw = fake.get();
  HttpGeneratorOptions opts;
  opts.retry = NoSleep();
  HttpGenerator gen(std::move(fake), opts);
  EXPECT_EQ(gen.Generate("p", {}).status().code(),
            absl::StatusCode::kPermissionDenied);
  EXPECT_EQ(raw->paths.size(), 1u);
}

TEST(HttpGeneratorTest, MalformedResponsesAreDataLoss) {
  for (const std::string& body :
       {std::string("not json"), std::string("[1,2]"), std::string("{}"),
        std::string(R"({"text": 3})")}) {
    auto fake = std::make_unique<FakeTransport>(
        std::deque<absl::StatusOr<HttpResponse>>(3, HttpResponse{200, body}));
    HttpGeneratorOptions opts;
    opts.retry = NoSleep();
    HttpGenerator gen(std::move(fake), opts);
    EXPECT_EQ(gen.Generate("p", {}).status().code(), absl::StatusCode::kDataLoss)
        << body;
  }
}

TEST(HttpGeneratorTest, NeutralRequestAndBearerHeader) {
  auto fake = std::make_unique<FakeTransport>(
      std::deque<absl::StatusOr<HttpResponse>>{
          Ok({{"text", " Yes"},
              {"tokens", {{{"text", " Yes"}, {"logprob", -0.05}}}}})});
  FakeTransport* raw = fake.get();
  HttpGeneratorOptions opts;
  opts.api_key = "sk-test";
  opts.supports_logprobs = true;
  opts.retry = NoSleep();
  HttpGenerator gen(std::move(fake), opts);
  GenerateOptions g;
  g.logprobs = true;
  g.seed = 12;
  g.max_tokens = 8;
  ASSERT_OK_AND_ASSIGN(GenerationResult r, gen.Generate("prompt text", g));
  ASSERT_EQ(r.tokens.size(), 1u);
  EXPECT_EQ(r.tokens[0].log_prob, -0.05);
  EXPECT_EQ(raw->last_headers.at("Authorization"), "Bearer sk-test");
  json sent = json::parse(raw->bodies[0]);
  EXPECT_EQ(sent["prompt"], "prompt text");
  EXPECT_EQ(sent["max_tokens"], 8);
  EXPECT_EQ(sent["logprobs"], true);
  EXPECT_EQ(sent["seed"], 12);
}

// A real loopback server speaking both wire protocols.
class LoopbackServer {
 public:
  LoopbackServer() {
    server_.Post("/generate", [this](const httplib::Request& req,
                                     httplib::Response& res) {
      last_auth = req.get_header_value("Authorization");
      json in = json::parse(req.body);
      res.set_content(json{{"text", "echo:" + in["prompt"].get<std::string>()}}
                          .dump(),
                      "application/json");
    });
    server_.Post("/v1/completions", [](const httplib::Request& req,
                                       httplib::Response& res) {
      json in = json::parse(req.body);
      json choice = {{"text", " No"}};
      if (in.contains("logprobs")) {
        choice["logprobs"] = {{"tokens", {" No"}}, {"token_logprobs", {-0.25}}};
      }
      res.set_content(json{{"choices", {choice}}}.dump(), "application/json");
    });
    server_.Get("/info", [](const httplib::Request&, httplib::Response& res) {
      res.set_content(R"({"dimension": 3})", "application/json");
    });
    server_.Post("/embed", [](const httplib::Request& req,
                              httplib::Response& res) {
      json in = json::parse(req.body);
      const double n = static_cast<double>(in["text"].get<std::string>().size());
      res.set_content(json{{"embedding", {n, 1.0, -1.0}}}.dump(),
                      "application/json");
    });
    port_ = server_.bind_to_any_port("127.0.0.1");
    thread_ = std::thread([this] { server_.listen_after_bind(); });
    server_.wait_until_ready();
  }
  ~LoopbackServer() {
    server_.stop();
    thread_.join();
  }
  std::string endpoint() const {
    return "http://127.0.0.1:" + std::to_string(port_);
  }

  std::string last_auth;

 private:
  httplib::Server server_;
  int port_ = 0;
  std::thread thread_;
};

TEST(HttpLoopbackTest, NeutralProtocol) {
  LoopbackServer server;
  HttpGeneratorOptions opts;
  opts.api_key = "k";
  HttpGenerator gen(MakeHttpTransport(server.endpoint()), opts);
  ASSERT_OK_AND_ASSIGN(GenerationResult r, gen.Generate("hello", {}));
  EXPECT_EQ(r.text, "echo:hello");
  EXPECT_EQ(server.last_auth, "Bearer k");
}

TEST(HttpLoopbackTest, OpenAiCompletionsProtocol) {
  LoopbackServer server;
  HttpGeneratorOptions opts;
  opts.protocol = WireProtocol::kOpenAiCompletions;
  opts.path = "/v1/completions";
  opts.model = "m";
  opts.supports_logprobs = true;
  HttpGenerator gen(MakeHttpTransport(server.endpoint()), opts);
  GenerateOptions g;
  g.logprobs = true;
  ASSERT_OK_AND_ASSIGN(GenerationResult r, gen.Generate("q", g));
  EXPECT_EQ(r.text, " No");
  ASSERT_EQ(r.tokens.size(), 1u);
  EXPECT_EQ(r.tokens[0].log_prob, -0.25);
  ASSERT_OK_AND_ASSIGN(GenerationResult bare, gen.Generate("q", {}));
  EXPECT_TRUE(bare.tokens.empty());
}

TEST(HttpLoopbackTest, EmbedderAdvertisesDimension) {
  LoopbackServer server;
  ASSERT_OK_AND_ASSIGN(auto emb,
                       HttpEmbedder::Connect(MakeHttpTransport(server.endpoint()),
                                             {}));
  EXPECT_EQ(emb->dimension(), 3u);
  ASSERT_OK_AND_ASSIGN(EmbeddingVector v, emb->Embed("abcd"));
  EXPECT_EQ(v, (EmbeddingVector{4, 1, -1}));
  EXPECT_EQ(emb->Embed("").status().code(), absl::StatusCode::kInvalidArgument);
}

TEST(HttpLoopbackTest, UnreachableEndpointIsRetryable) {
  // Port 1 on loopback refuses connections.
  HttpGeneratorOptions opts;
  opts.retry = NoSleep();
  opts.retry.max_attempts = 2;
  HttpGenerator gen(MakeHttpTransport("http://127.0.0.1:1",
                                      std::chrono::milliseconds(500)),
                    opts);
  auto r = gen.Generate("x", {});
  ASSERT_FALSE(r.ok());
  EXPECT_TRUE(IsRetryable(r.status())) << r.status();
  EXPECT_EQ(gen.attempt_log().size(), 2u);
}

TEST(HttpEmbedderTest, WrongDimensionIsDataLoss) {
  auto fake = std::make_unique<FakeTransport>(
      std::deque<absl::StatusOr<HttpResponse>>{
          Ok({{"dimension", 2}}), Ok({{"embedding", {1.0, 2.0, 3.0}}}),
          Ok({{"embedding", {1.0, 2.0, 3.0}}}),
          Ok({{"embedding", {1.0, 2.0, 3.0}}})});
  HttpEmbedderOptions opts;
  opts.retry = NoSleep();
  ASSERT_OK_AND_ASSIGN(auto emb, HttpEmbedder::Connect(std::move(fake), opts));
  EXPECT_EQ(emb->Embed("x").status().code(), absl::StatusCode::kDataLoss);
}

}  // namespace
}  // namespace ragaudit
