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

// Evaluation protocol: fixed member/non-member pools, repeated runs over
// random subsets of them, and per-sample membership records.

#ifndef RAGAUDIT_PROTOCOL_H_
#define RAGAUDIT_PROTOCOL_H_

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "ragaudit/attack.h"
#include "ragaudit/attack_model.h"
#include "ragaudit/corpus.h"
#include "ragaudit/rag.h"
#include "ragaudit/report.h"

namespace ragaudit {

struct ProtocolConfig {
  size_t eval_pool_members = 2000;
  size_t eval_pool_non_members = 2000;
  size_t runs = 10;
  size_t per_run_members = 500;
  size_t per_run_non_members = 500;
  uint64_t seed = 0;

  // Gray-box scoring. Each run trains its own ensemble on pool samples that
  // are not part of that run's evaluation sample.
  bool graybox = false;
  EnsembleOptions ensemble;
  size_t train_members = 500;
  size_t train_non_members = 500;

  // Concurrent attack calls. Results do not depend on it.
  size_t threads = 1;
};

absl::Status ValidateProtocolConfig(const ProtocolConfig& config);

// What attacking one document produced.
struct AttackOutcome {
  Verdict verdict;
  std::optional<GrayBoxFeatures> features;
  // Optional audit-log line for the underlying query.
  std::string audit_line;
};

using AttackFn = std::function<absl::StatusOr<AttackOutcome>(const Document&)>;

struct MembershipRecord {
  std::string sample_id;
  int run = 0;
  bool member = false;
  Verdict verdict;
  std::optional<GrayBoxFeatures> features;
  bool blackbox = false;
  std::optional<double> graybox_score;

  friend bool operator==(const MembershipRecord&,
                         const MembershipRecord&) = default;
};

// {sample_id, run, truth, verdict, p_selected?, logit?, class_scaled?,
//  indicator?, blackbox, graybox_score?}
nlohmann::json RecordToJson(const MembershipRecord& record);
absl::StatusOr<MembershipRecord> RecordFromJson(const nlohmann::json& j);

struct EvalPools {
  std::vector<const Document*> members;
  std::vector<const Document*> non_members;
};

// The fixed evaluation pools, a seeded draw from the split. Pointers refer
// into `split`.
absl::StatusOr<EvalPools> DrawPools(const CorpusSplit& split,
                                    const ProtocolConfig& config);

struct ProtocolResult {
  MetricsReport report;
  // Ordered by (run, members before non-members, draw order).
  std::vector<MembershipRecord> records;
  // One per attacked document, in attack order.
  std::vector<std::string> audit_lines;
};

// Draws the pools once, then per run a fresh sample from them. Each document
// is attacked at most once; later runs reuse the cached outcome. The report
// has its per-run and mean fields filled; cell, config hash and retrieval
// fields are left for the caller.
absl::StatusOr<ProtocolResult> RunProtocol(const AttackFn& attack,
                                           const CorpusSplit& split,
                                           const ProtocolConfig& config);

// Recomputes per-run metrics, means and missing statistics from stored
// records. Fields other than metrics are copied from `base`. RunProtocol
// computes its report with this same function.
absl::StatusOr<MetricsReport> MetricsFromRecords(
    const std::vector<MembershipRecord>& records, const MetricsReport& base);

struct RagAttackOptions {
  int format_id = 2;
  bool graybox = false;
  // Per-document generation seeds derive from this and the document id.
  uint64_t seed = 0;
  int max_tokens = 32;
  TargetOptions target;
  FeatureOptions features;
  bool audit = false;
};

// Attack through a RAG system: extract the target sample, build the attack
// prompt, query, parse the verdict and, in gray-box mode, extract features.
// Gray-box mode against a generator without log-probabilities fails here.
absl::StatusOr<AttackFn> MakeRagAttack(const RagSystem& system,
                                       const RagAttackOptions& options);

}  // namespace ragaudit

#endif  // RAGAUDIT_PROTOCOL_H_
