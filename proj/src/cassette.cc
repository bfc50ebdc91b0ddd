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

#include "ragaudit/cassette.h"

#include <fstream>
#include <utility>

#include "absl/strings/str_cat.h"
#include "ragaudit/status_macros.h"
#include "ragaudit/util.h"

namespace ragaudit {

using nlohmann::json;

std::string RequestHash(std::string_view prompt,
                        const GenerateOptions& options) {
  // nlohmann::json objects keep keys sorted, so dump() is canonical.
  json req;
  req["prompt"] = std::string(prompt);
  req["max_tokens"] = options.max_tokens;
  req["logprobs"] = options.logprobs;
  req["seed"] = options.seed;
  return Hex64(Fnv1a64(req.dump()));
}

json GenerationToJson(const GenerationResult& result) {
  json j;
  j["text"] = result.text;
  json tokens = json::array();
  for (const TokenLogProb& t : result.tokens) {
    tokens.push_back({{"text", t.text}, {"logprob", t.log_prob}});
  }
  j["tokens"] = std::move(tokens);
  return j;
}

absl::StatusOr<GenerationResult> GenerationFromJson(const json& j) {
  GenerationResult result;
  try {
    result.text = j.at("text").get<std::string>();
    for (const json& t : j.at("tokens")) {
      result.tokens.push_back(
          {t.at("text").get<std::string>(), t.at("logprob").get<double>()});
    }
  } catch (const json::exception& e) {
    return absl::DataLossError(absl::StrCat("malformed generation: ", e.what()));
  }
  RAGAUDIT_RETURN_IF_ERROR(ValidateGenerationResult(result));
  return result;
}

CassetteGenerator::CassetteGenerator(std::string path, CassetteMode mode,
                                     Generator* inner, bool supports_logprobs)
    : path_(std::move(path)),
      mode_(mode),
      inner_(inner),
      supports_logprobs_(supports_logprobs) {}

absl::StatusOr<std::unique_ptr<CassetteGenerator>> CassetteGenerator::Open(
    const std::string& path, CassetteMode mode, Generator* inner,
    bool supports_logprobs) {
  if (mode == CassetteMode::kRecord && inner == nullptr) {
    return absl::InvalidArgumentError("recording needs a backend generator");
  }
  std::unique_ptr<CassetteGenerator> gen(
      new CassetteGenerator(path, mode, inner, supports_logprobs));
  std::string content;
  if (!ReadFileToString(path, &content)) {
    if (mode == CassetteMode::kReplay) {
      return absl::NotFoundError(absl::StrCat("cannot read cassette ", path));
    }
    return gen;
  }
  size_t line_no = 0;
  for (std::string_view line : SplitString(content, '\n')) {
    ++line_no;
    if (TrimWhitespace(line).empty()) continue;
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded() || !j.contains("request_hash") ||
        !j["request_hash"].is_string() || !j.contains("response")) {
      return absl::DataLossError(
          absl::StrCat("cassette ", path, " line ", line_no, " is malformed"));
    }
    auto result = GenerationFromJson(j["response"]);
    if (!result.ok()) {
      return absl::DataLossError(absl::StrCat("cassette ", path, " line ",
                                              line_no, ": ",
                                              result.status().message()));
    }
    gen->entries_[j["request_hash"].get<std::string>()] = *std::move(result);
  }
  return gen;
}

std::string CassetteGenerator::name() const {
  if (inner_ != nullptr) return absl::StrCat("cassette:", inner_->name());
  return "cassette";
}

absl::StatusOr<GenerationResult> CassetteGenerator::Generate(
    std::string_view prompt, const GenerateOptions& options) {
  const std::string hash = RequestHash(prompt, options);
  {
    std::lock_guard<std::mutex> lock(mu_);
    auto it = entries_.find(hash);
    if (it != entries_.end()) return it->second;
  }
  if (mode_ == CassetteMode::kReplay) {
    return absl::NotFoundError(
        absl::StrCat("cassette has no response for request ", hash));
  }
  RAGAUDIT_ASSIGN_OR_RETURN(GenerationResult result,
                            inner_->Generate(prompt, options));
  std::lock_guard<std::mutex> lock(mu_);
  ++forwarded_;
  if (entries_.emplace(hash, result).second) {
    std::ofstream out(path_, std::ios::app | std::ios::binary);
    if (!out) {
      return absl::InternalError(absl::StrCat("cannot append to ", path_));
    }
    json line;
    line["request_hash"] = hash;
    line["response"] = GenerationToJson(result);
    out << line.dump() << '\n';
  }
  return result;
}

size_t CassetteGenerator::size() const {
  std::lock_guard<std::mutex> lock(mu_);
  return entries_.size();
}

size_t CassetteGenerator::forwarded() const {
  std::lock_guard<std::mutex> lock(mu_);
  return forwarded_;
}

}  // namespace ragaudit
