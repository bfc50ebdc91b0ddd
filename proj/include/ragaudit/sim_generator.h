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

#ifndef RAGAUDIT_SIM_GENERATOR_H_
#define RAGAUDIT_SIM_GENERATOR_H_

#include <cmath>
#include <cstdint>
#include <string>
#include <vector>

#include "absl/status/status.h"
#include "ragaudit/model.h"
#include "ragaudit/rag.h"

namespace ragaudit {

// Log-probability drawn uniformly from [lo, hi], both <= 0.
struct LogProbRange {
  double lo = 0.0;
  double hi = 0.0;

  static LogProbRange OfProbabilities(double p_lo, double p_hi) {
    return {std::log(p_lo), std::log(p_hi)};
  }
};

struct SimGeneratorConfig {
  // Probability of answering according to the context.
  double grounding_fidelity = 0.9;
  // Probability of refusing with "unanswerable" under a defended template.
  double defense_compliance = 0.0;
  // "Yes" when the target is in the context.
  LogProbRange member_yes = LogProbRange::OfProbabilities(0.90, 0.999);
  // "No" when the target is absent.
  LogProbRange nonmember_no = LogProbRange::OfProbabilities(0.60, 0.999);
  // Answers that contradict the context.
  LogProbRange ungrounded = LogProbRange::OfProbabilities(0.50, 0.90);
  // The "unanswerable" refusal token.
  LogProbRange refusal = LogProbRange::OfProbabilities(0.60, 0.999);
  uint64_t rng_seed = 0;
};

absl::Status ValidateSimGeneratorConfig(const SimGeneratorConfig& config);

// Context-grounded stand-in for a language model. It parses the rendered RAG
// prompt back into context and question, locates the quoted target sample and
// answers Yes/No depending on whether the target occurs verbatim in the
// context:
//   - defended template: "unanswerable" with probability defense_compliance;
//   - target in context: "Yes" with probability grounding_fidelity, else "No";
//   - target absent: "No" with probability grounding_fidelity, else "Yes".
// Output is a pure function of (config, prompt, options.seed).
class SimGenerator final : public Generator {
 public:
  explicit SimGenerator(SimGeneratorConfig config);

  // Adds a template the generator should recognize besides the built-in ones.
  void AddTemplate(RagTemplate tmpl);

  std::string name() const override { return "sim"; }
  bool SupportsLogprobs() const override { return true; }
  bool IsSimulated() const override { return true; }

  absl::StatusOr<GenerationResult> Generate(
      std::string_view prompt, const GenerateOptions& options) override;

 private:
  SimGeneratorConfig config_;
  std::vector<RagTemplate> templates_;
};

}  // namespace ragaudit

#endif  // RAGAUDIT_SIM_GENERATOR_H_
