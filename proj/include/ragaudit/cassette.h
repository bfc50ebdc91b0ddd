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

// Record/replay wrapper around a Generator. A cassette is a JSONL file with
// one {"request_hash", "response"} object per line.

#ifndef RAGAUDIT_CASSETTE_H_
#define RAGAUDIT_CASSETTE_H_

#include <map>
#include <memory>
#include <mutex>
#include <string>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "ragaudit/model.h"

namespace ragaudit {

enum class CassetteMode {
  // Serve recorded responses; forward misses to the wrapped generator and
  // append them to the file.
  kRecord,
  // Serve recorded responses only. A miss is NotFound.
  kReplay,
};

// Hex FNV-1a of the canonical request JSON {logprobs, max_tokens, prompt,
// seed}.
std::string RequestHash(std::string_view prompt, const GenerateOptions& options);

nlohmann::json GenerationToJson(const GenerationResult& result);
absl::StatusOr<GenerationResult> GenerationFromJson(const nlohmann::json& j);

class CassetteGenerator final : public Generator {
 public:
  // `inner` may be null in replay mode. `supports_logprobs` is what the
  // recorded backend advertised.
  static absl::StatusOr<std::unique_ptr<CassetteGenerator>> Open(
      const std::string& path, CassetteMode mode, Generator* inner,
      bool supports_logprobs);

  std::string name() const override;
  bool SupportsLogprobs() const override { return supports_logprobs_; }
  // Recorded responses come from a real backend, so replayed runs are still
  // compared against the published reference cells.
  bool IsSimulated() const override { return false; }

  absl::StatusOr<GenerationResult> Generate(
      std::string_view prompt, const GenerateOptions& options) override;

  size_t size() const;
  // Number of calls forwarded to the wrapped generator.
  size_t forwarded() const;

 private:
  CassetteGenerator(std::string path, CassetteMode mode, Generator* inner,
                    bool supports_logprobs);

  std::string path_;
  CassetteMode mode_;
  Generator* inner_;
  bool supports_logprobs_;
  mutable std::mutex mu_;
  std::map<std::string, GenerationResult> entries_;
  size_t forwarded_ = 0;
};

}  // namespace ragaudit

#endif  // RAGAUDIT_CASSETTE_H_
