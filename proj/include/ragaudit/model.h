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

// Interfaces for the embedding model and the generator, plus the
// deterministic n-gram embedder used for offline runs.

#ifndef RAGAUDIT_MODEL_H_
#define RAGAUDIT_MODEL_H_

#include <cstdint>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/status.h"
#include "absl/status/statusor.h"

namespace ragaudit {

using EmbeddingVector = std::vector<float>;

class Embedder {
 public:
  virtual ~Embedder() = default;

  virtual size_t dimension() const = 0;
  virtual std::string name() const = 0;

  // Maps `text` to a finite vector of length dimension(). Empty text is
  // rejected with InvalidArgument. Transient backend failures are reported as
  // Unavailable or DeadlineExceeded, permanent ones with any other code.
  virtual absl::StatusOr<EmbeddingVector> Embed(std::string_view text) const = 0;
};

struct TokenLogProb {
  std::string text;
  double log_prob = 0.0;

  friend bool operator==(const TokenLogProb&, const TokenLogProb&) = default;
};

struct GenerationResult {
  std::string text;
  // Empty when the backend exposes no log-probabilities.
  std::vector<TokenLogProb> tokens;
  // Set when the concatenated token texts differ from `text`.
  bool detokenization_mismatch = false;

  friend bool operator==(const GenerationResult&,
                         const GenerationResult&) = default;
};

struct GenerateOptions {
  int max_tokens = 32;
  bool logprobs = false;
  // Per-call seed. Simulated backends derive all randomness from it.
  uint64_t seed = 0;
};

class Generator {
 public:
  virtual ~Generator() = default;

  virtual std::string name() const = 0;
  // Whether Generate() can return per-token log-probabilities.
  virtual bool SupportsLogprobs() const = 0;
  // Simulated backends are pure functions of their inputs.
  virtual bool IsSimulated() const { return false; }

  virtual absl::StatusOr<GenerationResult> Generate(
      std::string_view prompt, const GenerateOptions& options) = 0;
};

// Adapter-boundary check: log-probabilities must be finite and <= 0. Flags
// (does not reject) token texts that do not concatenate to the output text.
absl::Status ValidateGenerationResult(GenerationResult& result);

// Hashed character-trigram and word-unigram embedder, L2-normalized. A pure
// function of the text, so identical strings give bit-identical vectors.
class SimEmbedder final : public Embedder {
 public:
  explicit SimEmbedder(size_t dimension = 384, uint64_t seed = 0)
      : dimension_(dimension), seed_(seed) {}

  size_t dimension() const override { return dimension_; }
  std::string name() const override { return "sim"; }

  // Never fails for non-empty input.
  absl::StatusOr<EmbeddingVector> Embed(std::string_view text) const override;

  // Raw projection; the empty string maps to the zero vector.
  EmbeddingVector SimEmbed(std::string_view text) const;

 private:
  size_t dimension_;
  uint64_t seed_;
};

}  // namespace ragaudit

#endif  // RAGAUDIT_MODEL_H_
