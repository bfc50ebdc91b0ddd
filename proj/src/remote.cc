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

#include <cmath>
#include <utility>

#include "absl/strings/match.h"
#include "absl/strings/str_cat.h"
#include "httplib.h"
#include "json.hpp"
#include "ragaudit/status_macros.h"

namespace ragaudit {
namespace {

using nlohmann::json;

class HttplibTransport final : public HttpTransport {
 public:
  HttplibTransport(std::string endpoint, std::chrono::milliseconds timeout)
      : endpoint_(std::move(endpoint)), timeout_(timeout) {}

  absl::StatusOr<HttpResponse> Post(
      const std::string& path, const std::string& body,
      const std::map<std::string, std::string>& headers) override {
    httplib::Client client = MakeClient();
    auto res = client.Post(path, ToHeaders(headers), body, "application/json");
    return Convert(res);
  }

  absl::StatusOr<HttpResponse> Get(
      const std::string& path,
      const std::map<std::string, std::string>& headers) override {
    httplib::Client client = MakeClient();
    auto res = client.Get(path, ToHeaders(headers));
    return Convert(res);
  }

 private:
  // One client per call keeps the transport safe to share between threads.
  httplib::Client MakeClient() const {
    httplib::Client client(endpoint_);
    const auto secs = std::chrono::duration_cast<std::chrono::seconds>(timeout_);
    const auto usecs =
        std::chrono::duration_cast<std::chrono::microseconds>(timeout_ - secs);
    client.set_connection_timeout(secs.count(), usecs.count());
    client.set_read_timeout(secs.count(), usecs.count());
    client.set_write_timeout(secs.count(), usecs.count());
    return client;
  }

  static httplib::Headers ToHeaders(
      const std::map<std::string, std::string>& headers) {
    return httplib::Headers(headers.begin(), headers.end());
  }

  absl::StatusOr<HttpResponse> Convert(const httplib::Result& res) const {
    if (!res) {
      const httplib::Error err = res.error();
      std::string what =
          absl::StrCat(endpoint_, ": ", httplib::to_string(err));
      if (err == httplib::Error::ConnectionTimeout ||
          err == httplib::Error::Read || err == httplib::Error::Write) {
        return absl::DeadlineExceededError(what);
      }
      return absl::UnavailableError(what);
    }
    return HttpResponse{res->status, res->body};
  }

  std::string endpoint_;
  std::chrono::milliseconds timeout_;
};

std::map<std::string, std::string> AuthHeaders(const std::string& api_key) {
  std::map<std::string, std::string> headers;
  if (!api_key.empty()) headers["Authorization"] = "Bearer " + api_key;
  return headers;
}

absl::StatusOr<json> ParseBody(const std::string& body) {
  json doc = json::parse(body, nullptr, /*allow_exceptions=*/false);
  if (doc.is_discarded() || !doc.is_object()) {
    return absl::DataLossError("malformed response: not a JSON object");
  }
  return doc;
}

absl::StatusOr<HttpResponse> CheckedCall(
    const std::function<absl::StatusOr<HttpResponse>()>& call) {
  RAGAUDIT_ASSIGN_OR_RETURN(HttpResponse response, call());
  RAGAUDIT_RETURN_IF_ERROR(StatusFromHttp(response));
  return response;
}

}  // namespace

std::unique_ptr<HttpTransport> MakeHttpTransport(
    const std::string& endpoint, std::chrono::milliseconds timeout) {
  return std::make_unique<HttplibTransport>(endpoint, timeout);
}

absl::Status StatusFromHttp(const HttpResponse& response) {
  const int code = response.status;
  if (code >= 200 && code < 300) return absl::OkStatus();
  std::string what = absl::StrCat("HTTP ", code);
  if (!response.body.empty()) {
    absl::StrAppend(&what, ": ", response.body.substr(0, 200));
  }
  if (code == 429 || code >= 500) return absl::UnavailableError(what);
  if (code == 401 || code == 403) return absl::PermissionDeniedError(what);
  return absl::InvalidArgumentError(what);
}

bool IsRetryable(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kDeadlineExceeded:
    case absl::StatusCode::kUnavailable:
    case absl::StatusCode::kDataLoss:
      return true;
    default:
      return false;
  }
}

HttpGenerator::HttpGenerator(std::unique_ptr<HttpTransport> transport,
                             HttpGeneratorOptions options)
    : transport_(std::move(transport)),
      options_(std::move(options)),
      in_flight_(std::clamp(options_.max_in_flight, 1, 1024)) {}

std::string HttpGenerator::EncodeRequest(std::string_view prompt,
                                         const GenerateOptions& options) const {
  json req;
  req["prompt"] = std::string(prompt);
  req["max_tokens"] = options.max_tokens;
  if (options_.protocol == WireProtocol::kOpenAiCompletions) {
    req["model"] = options_.model;
    req["temperature"] = 0;
    req["seed"] = options.seed;
    if (options.logprobs) req["logprobs"] = 1;
  } else {
    req["logprobs"] = options.logprobs;
    req["seed"] = options.seed;
  }
  return req.dump();
}

absl::StatusOr<GenerationResult> HttpGenerator::DecodeResponse(
    const std::string& body) const {
  RAGAUDIT_ASSIGN_OR_RETURN(json doc, ParseBody(body));
  GenerationResult result;
  try {
    if (options_.protocol == WireProtocol::kOpenAiCompletions) {
      const json& choice = doc.at("choices").at(0);
      result.text = choice.at("text").get<std::string>();
      auto lp = choice.find("logprobs");
      if (lp != choice.end() && lp->is_object()) {
        const json& toks = lp->at("tokens");
        const json& vals = lp->at("token_logprobs");
        if (toks.size() != vals.size()) {
          return absl::DataLossError(
              "malformed response: tokens and token_logprobs differ in length");
        }
        for (size_t i = 0; i < toks.size(); ++i) {
          result.tokens.push_back(
              {toks[i].get<std::string>(), vals[i].get<double>()});
        }
      }
    } else {
      result.text = doc.at("text").get<std::string>();
      auto toks = doc.find("tokens");
      if (toks != doc.end() && toks->is_array()) {
        for (const json& t : *toks) {
          result.tokens.push_back(
              {t.at("text").get<std::string>(), t.at("logprob").get<double>()});
        }
      }
    }
  } catch (const json::exception& e) {
    return absl::DataLossError(absl::StrCat("malformed response: ", e.what()));
  }
  RAGAUDIT_RETURN_IF_ERROR(ValidateGenerationResult(result));
  return result;
}

absl::StatusOr<GenerationResult> HttpGenerator::Generate(
    std::string_view prompt, const GenerateOptions& options) {
  const std::string body = EncodeRequest(prompt, options);
  const auto headers = AuthHeaders(options_.api_key);
  std::vector<AttemptLog> attempts;
  in_flight_.acquire();
  auto result = CallWithRetry<GenerationResult>(
      [&]() -> absl::StatusOr<GenerationResult> {
        RAGAUDIT_ASSIGN_OR_RETURN(HttpResponse response, CheckedCall([&] {
                                    return transport_->Post(options_.path, body,
                                                            headers);
                                  }));
        return DecodeResponse(response.body);
      },
      options_.retry, &attempts);
  in_flight_.release();
  {
    std::lock_guard<std::mutex> lock(log_mu_);
    log_.insert(log_.end(), attempts.begin(), attempts.end());
  }
  return result;
}

std::vector<AttemptLog> HttpGenerator::attempt_log() const {
  std::lock_guard<std::mutex> lock(log_mu_);
  return log_;
}

HttpEmbedder::HttpEmbedder(std::unique_ptr<HttpTransport> transport,
                           HttpEmbedderOptions options, size_t dimension)
    : transport_(std::move(transport)),
      options_(std::move(options)),
      dimension_(dimension) {}

absl::StatusOr<std::unique_ptr<HttpEmbedder>> HttpEmbedder::Connect(
    std::unique_ptr<HttpTransport> transport, HttpEmbedderOptions options) {
  HttpTransport* t = transport.get();
  const auto headers = AuthHeaders(options.api_key);
  auto dim = CallWithRetry<size_t>(
      [&]() -> absl::StatusOr<size_t> {
        RAGAUDIT_ASSIGN_OR_RETURN(
            HttpResponse response,
            CheckedCall([&] { return t->Get(options.info_path, headers); }));
        RAGAUDIT_ASSIGN_OR_RETURN(json doc, ParseBody(response.body));
        auto it = doc.find("dimension");
        if (it == doc.end() || !it->is_number_unsigned() ||
            it->get<size_t>() == 0) {
          return absl::DataLossError(
              "malformed response: missing positive \"dimension\"");
        }
        return it->get<size_t>();
      },
      options.retry);
  if (!dim.ok()) return dim.status();
  return std::unique_ptr<HttpEmbedder>(
      new HttpEmbedder(std::move(transport), std::move(options), *dim));
}

absl::StatusOr<EmbeddingVector> HttpEmbedder::Embed(
    std::string_view text) const {
  if (text.empty()) return absl::InvalidArgumentError("empty text");
  json req;
  req["text"] = std::string(text);
  const std::string body = req.dump();
  const auto headers = AuthHeaders(options_.api_key);
  return CallWithRetry<EmbeddingVector>(
      [&]() -> absl::StatusOr<EmbeddingVector> {
        RAGAUDIT_ASSIGN_OR_RETURN(HttpResponse response, CheckedCall([&] {
                                    return transport_->Post(options_.path, body,
                                                            headers);
                                  }));
        RAGAUDIT_ASSIGN_OR_RETURN(json doc, ParseBody(response.body));
        EmbeddingVector v;
        try {
          v = doc.at("embedding").get<EmbeddingVector>();
        } catch (const json::exception& e) {
          return absl::DataLossError(
              absl::StrCat("malformed response: ", e.what()));
        }
        if (v.size() != dimension_) {
          return absl::DataLossError(absl::StrCat(
              "embedding has dimension ", v.size(), ", expected ", dimension_));
        }
        for (float x : v) {
          if (!std::isfinite(x)) {
            return absl::DataLossError("embedding contains non-finite values");
          }
        }
        return v;
      },
      options_.retry);
}

}  // namespace ragaudit
