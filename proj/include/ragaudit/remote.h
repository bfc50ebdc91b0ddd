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

// JSON-over-HTTP clients for remote embedding and generation services.
//
// Generation wire protocol (kNeutral):
//   POST {path}  {"prompt": str, "max_tokens": int, "logprobs": bool}
//   200          {"text": str, "tokens": [{"text": str, "logprob": float}]}
// Embedding wire protocol:
//   GET  {info_path}  -> {"dimension": int}
//   POST {path}  {"text": str}  -> {"embedding": [float, ...]}
//
// kOpenAiCompletions maps the same calls onto an OpenAI-style /v1/completions
// endpoint (choices[0].text, choices[0].logprobs.{tokens,token_logprobs}).

#ifndef RAGAUDIT_REMOTE_H_
#define RAGAUDIT_REMOTE_H_

#include <algorithm>
#include <chrono>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <semaphore>
#include <string>
#include <thread>
#include <vector>

#include "absl/status/statusor.h"
#include "ragaudit/model.h"

namespace ragaudit {

struct HttpResponse {
  int status = 0;
  std::string body;
};

// Transport seam. Implementations report timeouts as DeadlineExceeded and
// connection failures as Unavailable; any HTTP status is a normal response.
class HttpTransport {
 public:
  virtual ~HttpTransport() = default;
  virtual absl::StatusOr<HttpResponse> Post(
      const std::string& path, const std::string& body,
      const std::map<std::string, std::string>& headers) = 0;
  virtual absl::StatusOr<HttpResponse> Get(
      const std::string& path,
      const std::map<std::string, std::string>& headers) = 0;
};

// cpp-httplib transport for "http://host:port" endpoints.
std::unique_ptr<HttpTransport> MakeHttpTransport(
    const std::string& endpoint,
    std::chrono::milliseconds timeout = std::chrono::seconds(60));

struct RetryPolicy {
  int max_attempts = 3;
  std::chrono::milliseconds initial_backoff{250};
  double multiplier = 2.0;
  std::chrono::milliseconds max_backoff{4000};
  // Replaced in tests to avoid real sleeps.
  std::function<void(std::chrono::milliseconds)> sleep;
};

struct AttemptLog {
  int attempt = 0;
  std::string outcome;
};

// Maps an HTTP status onto a Status: 2xx OK, 429 and 5xx Unavailable, 401 and
// 403 PermissionDenied, anything else InvalidArgument.
absl::Status StatusFromHttp(const HttpResponse& response);

// Timeouts, unavailability and malformed (truncated) responses are retried.
bool IsRetryable(const absl::Status& status);

// Runs `call` up to policy.max_attempts times, sleeping with exponential
// backoff between retryable failures. Every attempt is appended to `log`.
template <typename T>
absl::StatusOr<T> CallWithRetry(const std::function<absl::StatusOr<T>()>& call,
                                const RetryPolicy& policy,
                                std::vector<AttemptLog>* log = nullptr) {
  std::chrono::milliseconds backoff = policy.initial_backoff;
  absl::StatusOr<T> result = absl::UnknownError("no attempt made");
  const int attempts = std::max(policy.max_attempts, 1);
  for (int attempt = 1; attempt <= attempts; ++attempt) {
    result = call();
    if (log != nullptr) {
      log->push_back({attempt, result.ok() ? std::string("ok")
                                           : result.status().ToString()});
    }
    if (result.ok() || !IsRetryable(result.status()) || attempt == attempts) {
      break;
    }
    if (policy.sleep) {
      policy.sleep(backoff);
    } else {
      std::this_thread::sleep_for(backoff);
    }
    backoff = std::min(
        policy.max_backoff,
        std::chrono::milliseconds(static_cast<int64_t>(
            static_cast<double>(backoff.count()) * policy.multiplier)));
  }
  return result;
}

enum class WireProtocol { kNeutral, kOpenAiCompletions };

struct HttpGeneratorOptions {
  std::string name = "remote";
  std::string path = "/generate";
  WireProtocol protocol = WireProtocol::kNeutral;
  // Model name sent with OpenAI-style requests.
  std::string model;
  std::string api_key;
  bool supports_logprobs = false;
  int max_in_flight = 4;
  RetryPolicy retry;
};

class HttpGenerator final : public Generator {
 public:
  HttpGenerator(std::unique_ptr<HttpTransport> transport,
                HttpGeneratorOptions options);

  std::string name() const override { return options_.name; }
  bool SupportsLogprobs() const override { return options_.supports_logprobs; }

  absl::StatusOr<GenerationResult> Generate(
      std::string_view prompt, const GenerateOptions& options) override;

  // Attempts of every call so far, in completion order.
  std::vector<AttemptLog> attempt_log() const;

 private:
  std::string EncodeRequest(std::string_view prompt,
                            const GenerateOptions& options) const;
  absl::StatusOr<GenerationResult> DecodeResponse(const std::string& body) const;

  std::unique_ptr<HttpTransport> transport_;
  HttpGeneratorOptions options_;
  std::counting_semaphore<1024> in_flight_;
  mutable std::mutex log_mu_;
  std::vector<AttemptLog> log_;
};

struct HttpEmbedderOptions {
  std::string name = "remote";
  std::string path = "/embed";
  std::string info_path = "/info";
  std::string api_key;
  RetryPolicy retry;
};

class HttpEmbedder final : public Embedder {
 public:
  // Queries the advertised dimension before returning.
  static absl::StatusOr<std::unique_ptr<HttpEmbedder>> Connect(
      std::unique_ptr<HttpTransport> transport, HttpEmbedderOptions options);

  size_t dimension() const override { return dimension_; }
  std::string name() const override { return options_.name; }
  absl::StatusOr<EmbeddingVector> Embed(std::string_view text) const override;

 private:
  HttpEmbedder(std::unique_ptr<HttpTransport> transport,
               HttpEmbedderOptions options, size_t dimension);

  std::unique_ptr<HttpTransport> transport_;
  HttpEmbedderOptions options_;
  size_t dimension_;
};

}  // namespace ragaudit

#endif  // RAGAUDIT_REMOTE_H_
