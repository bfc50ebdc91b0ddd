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

#include "ragaudit/protocol.h"

#include <algorithm>
#include <map>
#include <set>
#include <utility>

#include "absl/strings/str_cat.h"
#include "ragaudit/metrics.h"
#include "ragaudit/status_macros.h"
#include "ragaudit/util.h"

namespace ragaudit {
namespace {

using nlohmann::json;

// Salts separating the independent random streams of one protocol seed.
constexpr uint64_t kMemberPoolSalt = 1;
constexpr uint64_t kNonMemberPoolSalt = 2;
constexpr uint64_t kRunSalt = 0x100;
constexpr uint64_t kTrainSalt = 0x200;
constexpr uint64_t kEnsembleSalt = 0x300;

// Indices into `pool` for one run: the evaluation sample, then the training
// sample drawn from what is left.
struct RunDraw {
  std::vector<size_t> eval;
  std::vector<size_t> train;
};

RunDraw DrawRun(size_t pool_size, size_t eval_count, size_t train_count,
                uint64_t run_seed, uint64_t train_seed) {
  RunDraw draw;
  Rng rng(run_seed);
  draw.eval = rng.SampleIndices(pool_size, eval_count);
  std::vector<bool> used(pool_size, false);
  for (size_t i : draw.eval) used[i] = true;
  std::vector<size_t> rest;
  for (size_t i = 0; i < pool_size; ++i) {
    if (!used[i]) rest.push_back(i);
  }
  Rng train_rng(train_seed);
  for (size_t j :
       train_rng.SampleIndices(rest.size(), std::min(train_count, rest.size()))) {
    draw.train.push_back(rest[j]);
  }
  return draw;
}

}  // namespace

absl::Status ValidateProtocolConfig(const ProtocolConfig& c) {
  if (c.runs < 1) return absl::InvalidArgumentError("runs must be at least 1");
  if (c.per_run_members > c.eval_pool_members ||
      c.per_run_non_members > c.eval_pool_non_members) {
    return absl::InvalidArgumentError(
        "per-run sample sizes must not exceed the pool sizes");
  }
  if (c.per_run_members == 0 || c.per_run_non_members == 0) {
    return absl::InvalidArgumentError(
        "each run needs at least one member and one non-member");
  }
  if (c.graybox && (c.train_members == 0 || c.train_non_members == 0)) {
    return absl::InvalidArgumentError(
        "gray-box training needs members and non-members");
  }
  return absl::OkStatus();
}

json RecordToJson(const MembershipRecord& r) {
  json j;
  j["sample_id"] = r.sample_id;
  j["run"] = r.run;
  j["truth"] = r.member ? "member" : "non_member";
  j["verdict"] = std::string(VerdictName(r.verdict.value));
  if (r.verdict.matched_token_index) {
    j["token_index"] = *r.verdict.matched_token_index;
  }
  if (r.features) {
    j["indicator"] = r.features->answer_indicator;
    j["p_selected"] = r.features->p_selected;
    j["logit"] = r.features->logit_selected;
    j["class_scaled"] = r.features->class_scaled_logit;
  }
  j["blackbox"] = r.blackbox;
  if (r.graybox_score) j["graybox_score"] = *r.graybox_score;
  return j;
}

absl::StatusOr<MembershipRecord> RecordFromJson(const json& j) {
  MembershipRecord r;
  try {
    r.sample_id = j.at("sample_id").get<std::string>();
    r.run = j.at("run").get<int>();
    const std::string truth = j.at("truth").get<std::string>();
    if (truth != "member" && truth != "non_member") {
      return absl::DataLossError(absl::StrCat("bad truth label ", truth));
    }
    r.member = truth == "member";
    RAGAUDIT_ASSIGN_OR_RETURN(
        r.verdict.value,
        ParseVerdictName(j.at("verdict").get<std::string>()));
    if (auto it = j.find("token_index"); it != j.end()) {
      r.verdict.matched_token_index = it->get<size_t>();
    }
    if (j.contains("p_selected")) {
      GrayBoxFeatures f;
      f.answer_indicator = j.at("indicator").get<int>();
      f.p_selected = j.at("p_selected").get<double>();
      f.logit_selected = j.at("logit").get<double>();
      f.class_scaled_logit = j.at("class_scaled").get<double>();
      r.features = f;
    }
    r.blackbox = j.at("blackbox").get<bool>();
    if (auto it = j.find("graybox_score"); it != j.end()) {
      r.graybox_score = it->get<double>();
    }
  } catch (const json::exception& e) {
    return absl::DataLossError(absl::StrCat("malformed record: ", e.what()));
  }
  if (r.graybox_score.has_value() != r.features.has_value()) {
    return absl::DataLossError(absl::StrCat(
        "record ", r.sample_id, ": graybox_score present without features"));
  }
  return r;
}

absl::StatusOr<MetricsReport> MetricsFromRecords(
    const std::vector<MembershipRecord>& records, const MetricsReport& base) {
  MetricsReport report = base;
  report.runs.clear();
  std::map<int, std::vector<const MembershipRecord*>> by_run;
  std::map<std::string, bool> distinct_missing;
  for (const MembershipRecord& r : records) {
    by_run[r.run].push_back(&r);
    distinct_missing[r.sample_id] = r.verdict.value == VerdictValue::kMissing;
  }
  if (by_run.empty()) return absl::NotFoundError("no membership records");
  for (const auto& [run, recs] : by_run) {
    std::vector<bool> labels, predictions, missing;
    std::vector<double> bb_scores, gb_scores;
    bool graybox = true;
    for (const MembershipRecord* r : recs) {
      labels.push_back(r->member);
      predictions.push_back(r->blackbox);
      bb_scores.push_back(r->blackbox ? 1.0 : 0.0);
      missing.push_back(r->verdict.value == VerdictValue::kMissing);
      if (r->graybox_score) {
        gb_scores.push_back(*r->graybox_score);
      } else {
        graybox = false;
      }
    }
    RunMetrics m;
    m.run = run;
    auto rates = BinaryTprFpr(predictions, labels);
    if (!rates.ok()) {
      return absl::InvalidArgumentError(
          absl::StrCat("run ", run, ": ", rates.status().message()));
    }
    m.blackbox_tpr = rates->tpr;
    m.blackbox_fpr = rates->fpr;
    RAGAUDIT_ASSIGN_OR_RETURN(m.blackbox_auc, AucRoc(bb_scores, labels));
    if (graybox) {
      RAGAUDIT_ASSIGN_OR_RETURN(double auc, AucRoc(gb_scores, labels));
      RAGAUDIT_ASSIGN_OR_RETURN(double tpr0, TprAtFprZero(gb_scores, labels));
      m.graybox_auc = auc;
      m.graybox_tpr_at_fpr0 = tpr0;
    }
    m.missing = ComputeMissingStats(missing);
    report.runs.push_back(m);
  }
  AverageRuns(report);
  std::vector<bool> flags;
  for (const auto& [id, is_missing] : distinct_missing) flags.push_back(is_missing);
  report.missing = ComputeMissingStats(flags);
  return report;
}

absl::StatusOr<EvalPools> DrawPools(const CorpusSplit& split,
                                    const ProtocolConfig& config) {
  if (config.eval_pool_members > split.members.size() ||
      config.eval_pool_non_members > split.non_members.size()) {
    return absl::OutOfRangeError(absl::StrCat(
        "pools of ", config.eval_pool_members, "/",
        config.eval_pool_non_members, " requested but the split has ",
        split.members.size(), " members and ", split.non_members.size(),
        " non-members"));
  }
  EvalPools pools;
  for (size_t i : Rng(MixSeed(config.seed, kMemberPoolSalt))
                      .SampleIndices(split.members.size(),
                                     config.eval_pool_members)) {
    pools.members.push_back(&split.members[i]);
  }
  for (size_t i : Rng(MixSeed(config.seed, kNonMemberPoolSalt))
                      .SampleIndices(split.non_members.size(),
                                     config.eval_pool_non_members)) {
    pools.non_members.push_back(&split.non_members[i]);
  }
  return pools;
}

absl::StatusOr<ProtocolResult> RunProtocol(const AttackFn& attack,
                                           const CorpusSplit& split,
                                           const ProtocolConfig& config) {
  RAGAUDIT_RETURN_IF_ERROR(ValidateProtocolConfig(config));
  RAGAUDIT_ASSIGN_OR_RETURN(EvalPools pools, DrawPools(split, config));

  // Pool-local draws per run. Pool slot p < Mp is a member; otherwise the
  // non-member at p - Mp.
  const size_t mp = pools.members.size();
  std::vector<RunDraw> member_draws, non_member_draws;
  for (size_t run = 0; run < config.runs; ++run) {
    const uint64_t rs = MixSeed(config.seed, kRunSalt + run);
    const uint64_t ts = MixSeed(config.seed, kTrainSalt + run);
    member_draws.push_back(DrawRun(mp, config.per_run_members,
                                   config.graybox ? config.train_members : 0,
                                   MixSeed(rs, 1), MixSeed(ts, 1)));
    non_member_draws.push_back(
        DrawRun(pools.non_members.size(), config.per_run_non_members,
                config.graybox ? config.train_non_members : 0, MixSeed(rs, 2),
                MixSeed(ts, 2)));
  }

  // Every pool slot that any run needs, attacked once in ascending order.
  std::set<size_t> needed;
  for (size_t run = 0; run < config.runs; ++run) {
    for (size_t i : member_draws[run].eval) needed.insert(i);
    for (size_t i : member_draws[run].train) needed.insert(i);
    for (size_t i : non_member_draws[run].eval) needed.insert(mp + i);
    for (size_t i : non_member_draws[run].train) needed.insert(mp + i);
  }
  auto doc_at = [&](size_t slot) -> const Document& {
    return slot < mp ? *pools.members[slot] : *pools.non_members[slot - mp];
  };
  std::vector<size_t> slots(needed.begin(), needed.end());
  std::vector<absl::StatusOr<AttackOutcome>> outcomes(
      slots.size(), absl::UnknownError("not attacked"));
  ParallelFor(slots.size(), std::max<size_t>(config.threads, 1),
              [&](size_t i) { outcomes[i] = attack(doc_at(slots[i])); });
  std::map<size_t, const AttackOutcome*> cache;
  ProtocolResult result;
  for (size_t i = 0; i < slots.size(); ++i) {
    if (!outcomes[i].ok()) {
      return absl::Status(
          outcomes[i].status().code(),
          absl::StrCat("attacking ", doc_at(slots[i]).id, ": ",
                       outcomes[i].status().message()));
    }
    if (config.graybox && !outcomes[i]->features) {
      return absl::FailedPreconditionError(absl::StrCat(
          "attack on ", doc_at(slots[i]).id, " returned no gray-box features"));
    }
    cache[slots[i]] = &*outcomes[i];
    if (!outcomes[i]->audit_line.empty()) {
      result.audit_lines.push_back(outcomes[i]->audit_line);
    }
  }

  for (size_t run = 0; run < config.runs; ++run) {
    std::optional<AttackEnsemble> ensemble;
    if (config.graybox) {
      std::vector<LabeledFeatures> train;
      for (size_t i : member_draws[run].train) {
        train.push_back({*cache[i]->features, true});
      }
      for (size_t i : non_member_draws[run].train) {
        train.push_back({*cache[mp + i]->features, false});
      }
      EnsembleOptions opts = config.ensemble;
      opts.seed = MixSeed(config.ensemble.seed, kEnsembleSalt + run);
      auto trained = AttackEnsemble::Train(train, opts);
      if (!trained.ok()) {
        return absl::Status(trained.status().code(),
                            absl::StrCat("run ", run, " ensemble: ",
                                         trained.status().message()));
      }
      ensemble = *std::move(trained);
    }
    auto emit = [&](size_t slot, bool member) -> absl::Status {
      const AttackOutcome& o = *cache[slot];
      MembershipRecord rec;
      rec.sample_id = doc_at(slot).id;
      rec.run = static_cast<int>(run);
      rec.member = member;
      rec.verdict = o.verdict;
      rec.blackbox = BlackboxInfer(o.verdict);
      if (ensemble) {
        rec.features = o.features;
        RAGAUDIT_ASSIGN_OR_RETURN(double score, ensemble->Score(*o.features));
        rec.graybox_score = score;
      }
      result.records.push_back(std::move(rec));
      return absl::OkStatus();
    };
    for (size_t i : member_draws[run].eval) {
      RAGAUDIT_RETURN_IF_ERROR(emit(i, true));
    }
    for (size_t i : non_member_draws[run].eval) {
      RAGAUDIT_RETURN_IF_ERROR(emit(mp + i, false));
    }
  }

  MetricsReport base;
  base.seed = config.seed;
  base.attack_calls = slots.size();
  RAGAUDIT_ASSIGN_OR_RETURN(result.report,
                            MetricsFromRecords(result.records, base));
  return result;
}

absl::StatusOr<AttackFn> MakeRagAttack(const RagSystem& system,
                                       const RagAttackOptions& options) {
  if (system.generator == nullptr || system.index == nullptr ||
      system.embedder == nullptr) {
    return absl::InvalidArgumentError("RAG system is incomplete");
  }
  if (options.format_id < 0 || options.format_id >= kNumAttackFormats) {
    return absl::InvalidArgumentError(
        absl::StrCat("unknown attack prompt format ", options.format_id));
  }
  if (options.graybox && !system.generator->SupportsLogprobs()) {
    return absl::FailedPreconditionError(
        "gray-box requires token log-probabilities");
  }
  return AttackFn([system, options](
                      const Document& doc) -> absl::StatusOr<AttackOutcome> {
    RAGAUDIT_ASSIGN_OR_RETURN(TargetSample sample,
                              ExtractTargetSample(doc, options.target));
    RAGAUDIT_ASSIGN_OR_RETURN(std::string prompt,
                              BuildAttackPrompt(sample, options.format_id));
    GenerateOptions gen;
    gen.max_tokens = options.max_tokens;
    gen.logprobs = options.graybox;
    gen.seed = MixSeed(options.seed, Fnv1a64(doc.id));
    RAGAUDIT_ASSIGN_OR_RETURN(RagResponse response,
                              RagQuery(system, prompt, gen));
    AttackOutcome out;
    out.verdict = ParseVerdict(response.generation);
    if (options.graybox) {
      RAGAUDIT_ASSIGN_OR_RETURN(
          GrayBoxFeatures f,
          ExtractFeatures(response.generation, out.verdict, options.features));
      out.features = f;
    }
    if (options.audit) out.audit_line = AuditLogLine(prompt, response);
    return out;
  });
}

}  // namespace ragaudit
