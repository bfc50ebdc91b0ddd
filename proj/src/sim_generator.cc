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

#include "ragaudit/sim_generator.h"

#include "absl/strings/str_cat.h"
#include "ragaudit/attack.h"
#include "ragaudit/util.h"

namespace ragaudit {
namespace {

absl::Status CheckRange(const LogProbRange& r, std::string_view name) {
  if (!std::isfinite(r.lo) || !std::isfinite(r.hi) || r.lo > r.hi ||
      r.hi > 0.0) {
    return absl::InvalidArgumentError(absl::StrCat(
        std::string(name), " log-prob range must satisfy -inf < lo <= hi <= 0"));
  }
  return absl::OkStatus();
}

bool IsProbability(double p) { return p >= 0.0 && p <= 1.0; }

}  // namespace

absl::Status ValidateSimGeneratorConfig(const SimGeneratorConfig& config) {
  if (!IsProbability(config.grounding_fidelity)) {
    return absl::InvalidArgumentError("grounding_fidelity must be in [0, 1]");
  }
  if (!IsProbability(config.defense_compliance)) {
    return absl::InvalidArgumentError("defense_compliance must be in [0, 1]");
  }
  for (auto [range, name] :
       {std::pair{config.member_yes, "member_yes"},
        std::pair{config.nonmember_no, "nonmember_no"},
        std::pair{config.ungrounded, "ungrounded"},
        std::pair{config.refusal, "refusal"}}) {
    if (absl::Status s = CheckRange(range, name); !s.ok()) return s;
  }
  return absl::OkStatus();
}

SimGenerator::SimGenerator(SimGeneratorConfig config)
    : config_(std::move(config)) {
  for (TemplateKind kind :
       {TemplateKind::kPlain, TemplateKind::kDefended,
        TemplateKind::kLlamaSystemDefense1, TemplateKind::kLlamaSystemDefense2}) {
    templates_.push_back(BuiltinTemplate(kind));
    if (kind == TemplateKind::kLlamaSystemDefense1 ||
        kind == TemplateKind::kLlamaSystemDefense2) {
      templates_.push_back(WithoutChatMarkers(BuiltinTemplate(kind)));
    }
  }
}

void SimGenerator::AddTemplate(RagTemplate tmpl) {
  templates_.insert(templates_.begin(), std::move(tmpl));
}

absl::StatusOr<GenerationResult> SimGenerator::Generate(
    std::string_view prompt, const GenerateOptions& options) {
  const RagTemplate* matched = nullptr;
  ParsedPrompt parsed;
  for (const RagTemplate& t : templates_) {
    auto p = ParseRendered(t, prompt);
    if (p.ok()) {
      matched = &t;
      parsed = *std::move(p);
      break;
    }
  }
  if (matched == nullptr) {
    return absl::InvalidArgumentError(
        "prompt lacks the expected context and question delimiters");
  }
  auto target = ExtractAttackSample(parsed.user_prompt);
  if (!target.ok()) {
    return absl::InvalidArgumentError(
        absl::StrCat("prompt lacks a quoted target: ", target.status().message()));
  }

  // Every call consumes the same three draws, so outcomes for one prompt do
  // not depend on which branch an earlier draw selected.
  Rng rng(MixSeed(config_.rng_seed ^ options.seed, Fnv1a64(prompt)));
  const double u_defense = rng.NextDouble();
  const double u_grounding = rng.NextDouble();
  const double u_logprob = rng.NextDouble();
  auto draw = [u_logprob](const LogProbRange& r) {
    return r.lo + (r.hi - r.lo) * u_logprob;
  };

  GenerationResult result;
  double log_prob;
  if (ContainsDefenseInstructions(matched->body) &&
      u_defense < config_.defense_compliance) {
    result.text = "unanswerable";
    log_prob = draw(config_.refusal);
  } else {
    const bool in_context =
        !target->empty() && parsed.context.find(*target) != std::string::npos;
    const bool grounded = u_grounding < config_.grounding_fidelity;
    const bool yes = in_context == grounded;
    result.text = yes ? "Yes" : "No";
    if (grounded) {
      log_prob = draw(in_context ? config_.member_yes : config_.nonmember_no);
    } else {
      log_prob = draw(config_.ungrounded);
    }
  }
  if (options.logprobs) result.tokens.push_back({result.text, log_prob});
  return result;
}

}  // namespace ragaudit
