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

#include "ragaudit/model.h"

#include <cctype>
#include <cmath>

#include "absl/strings/str_cat.h"
#include "ragaudit/util.h"

namespace ragaudit {

absl::Status ValidateGenerationResult(GenerationResult& result) {
  std::string joined;
  for (size_t i = 0; i < result.tokens.size(); ++i) {
    const TokenLogProb& t = result.tokens[i];
    if (!std::isfinite(t.log_prob) || t.log_prob > 0.0) {
      return absl::DataLossError(absl::StrCat(
          "token ", i, " has invalid log-probability ", t.log_prob));
    }
    joined += t.text;
  }
  result.detokenization_mismatch =
      !result.tokens.empty() && joined != result.text;
  return absl::OkStatus();
}

namespace {

// Word unigrams carry more weight than individual trigrams.
constexpr float kWordWeight = 2.0f;

void AddFeature(std::string_view feature, uint64_t salt, float weight,
                std::vector<float>& out) {
  uint64_t h = Fnv1a64(feature, 0xcbf29ce484222325ULL ^ salt);
  size_t bucket = static_cast<size_t>(h % out.size());
  float sign = (h >> 63) ? -1.0f : 1.0f;
  out[bucket] += sign * weight;
}

}  // namespace

EmbeddingVector SimEmbedder::SimEmbed(std::string_view text) const {
  std::vector<float> v(dimension_, 0.0f);
  if (text.empty() || dimension_ == 0) return v;

  std::string lower(text);
  for (char& c : lower) {
    c = static_cast<char>(std::tolower(static_cast<unsigned char>(c)));
  }
  const uint64_t gram_salt = MixSeed(seed_, 1);
  const uint64_t word_salt = MixSeed(seed_, 2);
  if (lower.size() < 3) {
    AddFeature(lower, gram_salt, 1.0f, v);
  } else {
    for (size_t i = 0; i + 3 <= lower.size(); ++i) {
      AddFeature(std::string_view(lower).substr(i, 3), gram_salt, 1.0f, v);
    }
  }
  size_t start = std::string::npos;
  for (size_t i = 0; i <= lower.size(); ++i) {
    bool alnum = i < lower.size() &&
                 (std::isalnum(static_cast<unsigned char>(lower[i])) ||
                  static_cast<unsigned char>(lower[i]) >= 0x80);
    if (alnum && start == std::string::npos) start = i;
    if (!alnum && start != std::string::npos) {
      AddFeature(std::string_view(lower).substr(start, i - start), word_salt,
                 kWordWeight, v);
      start = std::string::npos;
    }
  }

  double norm = 0.0;
  for (float x : v) norm += static_cast<double>(x) * x;
  if (norm > 0.0) {
    const double inv = 1.0 / std::sqrt(norm);
    for (float& x : v) x = static_cast<float>(x * inv);
  }
  return v;
}

absl::StatusOr<EmbeddingVector> SimEmbedder::Embed(std::string_view text) const {
  if (text.empty()) return absl::InvalidArgumentError("cannot embed empty text");
  return SimEmbed(text);
}

}  // namespace ragaudit
