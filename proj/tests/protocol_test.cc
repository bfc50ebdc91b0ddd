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

#include <atomic>
#include <map>
#include <memory>
#include <optional>
#include <set>
#include <string>

#include "absl/strings/str_cat.h"
#include "gtest/gtest.h"
#include "ragaudit/retrieval.h"
#include "ragaudit/sim_generator.h"
#include "ragaudit/synthetic_corpus.h"
#include "ragaudit/util.h"
#include "test_util.h"

namespace ragaudit {
namespace {

CorpusSplit MakeSplit(size_t members, size_t non_members) {
  CorpusSplit split;
  for (size_t i = 0; i < members; ++i) {
    Document d;
    d.id = absl::StrCat("m", i);
    d.body = absl::StrCat("member ", i);
    split.members.push_back(d);
  }
  for (size_t i = 0; i < non_members; ++i) {
    Document d;
    d.id = absl::StrCat("n", i);
    d.body = absl::StrCat("non member ", i);
    split.non_members.push_back(d);
  }
  return split;
}

// Answers Yes for members with probability 0.8 and for non-members with 0.3,
// as a fixed function of the document id.
AttackFn NoisyOracle(std::atomic<int>* calls = nullptr) {
  return [calls](const Document& doc) -> absl::StatusOr<AttackOutcome> {
    if (calls != nullptr) ++*calls;
    const bool member = doc.id[0] == 'm';
    Rng rng(Fnv1a64(doc.id));
    const double u = rng.NextDouble();
    const bool yes = u < (member ? 0.8 : 0.3);
    AttackOutcome out;
    out.verdict.value = yes ? VerdictValue::kYes : VerdictValue::kNo;
    GrayBoxFeatures f;
    f.answer_indicator = yes ? 1 : -1;
    f.p_selected = 0.5 + 0.49 * rng.NextDouble();
    f.logit_selected = ClampedLogit(f.p_selected);
    f.class_scaled_logit = f.answer_indicator * f.logit_selected;
    out.features = f;
    return out;
  };
}

ProtocolConfig SmallConfig() {
  ProtocolConfig c;
  c.eval_pool_members = 200;
  c.eval_pool_non_members = 200;
  c.runs = 4;
  c.per_run_members = 50;
  c.per_run_non_members = 60;
  c.train_members = 40;
  c.train_non_members = 40;
  c.seed = 17;
  return c;
}

TEST(ProtocolTest, RecordsHaveTheRequestedShape) {
  CorpusSplit split = MakeSplit(300, 300);
  ASSERT_OK_AND_ASSIGN(ProtocolResult r,
                       RunProtocol(NoisyOracle(), split, SmallConfig()));
  ASSERT_EQ(r.records.size(), 4u * 110u);
  ASSERT_EQ(r.report.runs.size(), 4u);
  for (int run = 0; run < 4; ++run) {
    std::set<std::string> ids;
    size_t members = 0;
    for (const auto& rec : r.records) {
      if (rec.run != run) continue;
      ids.insert(rec.sample_id);
      members += rec.member;
      EXPECT_EQ(rec.member, rec.sample_id[0] == 'm');
      EXPECT_FALSE(rec.graybox_score.has_value());
    }
    EXPECT_EQ(ids.size(), 110u);  // Without replacement.
    EXPECT_EQ(members, 50u);
  }
}

TEST(ProtocolTest, PerRunMetricsMatchAnIndependentCount) {
  CorpusSplit split = MakeSplit(300, 300);
  ProtocolResult r = *RunProtocol(NoisyOracle(), split, SmallConfig());
  double mean_tpr = 0;
  for (const RunMetrics& m : r.report.runs) {
    int tp = 0, fp = 0, p = 0, n = 0;
    for (const auto& rec : r.records) {
      if (rec.run != m.run) continue;
      const bool yes = rec.verdict.value == VerdictValue::kYes;
      if (rec.member) {
        ++p;
        tp += yes;
      } else {
        ++n;
        fp += yes;
      }
    }
    EXPECT_DOUBLE_EQ(m.blackbox_tpr, double(tp) / p);
    EXPECT_DOUBLE_EQ(m.blackbox_fpr, double(fp) / n);
    // Binary AUC equals the mean of TPR and TNR.
    EXPECT_NEAR(m.blackbox_auc, (m.blackbox_tpr + 1 - m.blackbox_fpr) / 2, 1e-12);
    mean_tpr += m.blackbox_tpr / 4;
  }
  EXPECT_NEAR(r.report.blackbox_tpr, mean_tpr, 1e-12);
}

TEST(ProtocolTest, EachSampleAttackedOnceAndCallsBoundedByPools) {
  CorpusSplit split = MakeSplit(300, 300);
  ProtocolConfig c = SmallConfig();
  c.graybox = true;
  std::atomic<int> calls = 0;
  ProtocolResult r = *RunProtocol(NoisyOracle(&calls), split, c);
  EXPECT_EQ(static_cast<size_t>(calls.load()), r.report.attack_calls);
  EXPECT_LE(r.report.attack_calls, 400u);
  std::set<std::string> distinct;
  for (const auto& rec : r.records) distinct.insert(rec.sample_id);
  EXPECT_LE(distinct.size(), r.report.attack_calls);
}

TEST(ProtocolTest, DeterministicAndThreadIndependent) {
  CorpusSplit split = MakeSplit(300, 300);
  ProtocolConfig c = SmallConfig();
  c.graybox = true;
  ProtocolResult a = *RunProtocol(NoisyOracle(), split, c);
  c.threads = 8;
  ProtocolResult b = *RunProtocol(NoisyOracle(), split, c);
  EXPECT_EQ(a.records, b.records);
  EXPECT_EQ(a.report, b.report);
  c.seed = 18;
  EXPECT_NE(RunProtocol(NoisyOracle(), split, c)->records, a.records);
}

TEST(ProtocolTest, SingleRunOverTheWholePool) {
  CorpusSplit split = MakeSplit(120, 80);
  ProtocolConfig c;
  c.eval_pool_members = 120;
  c.eval_pool_non_members = 80;
  c.runs = 1;
  c.per_run_members = 120;
  c.per_run_non_members = 80;
  ProtocolResult r = *RunProtocol(NoisyOracle(), split, c);
  std::set<std::string> ids;
  for (const auto& rec : r.records) ids.insert(rec.sample_id);
  EXPECT_EQ(ids.size(), 200u);
  EXPECT_EQ(r.report.attack_calls, 200u);
  EXPECT_EQ(r.report.missing.total, 200u);
}

TEST(ProtocolTest, GrayboxTrainingExcludesTheRunsEvaluationSample) {
  // With a pool that leaves no room for training after evaluation, the
  // training set would have to overlap; it ends up empty and training fails.
  CorpusSplit split = MakeSplit(100, 100);
  ProtocolConfig c;
  c.eval_pool_members = 50;
  c.eval_pool_non_members = 50;
  c.runs = 1;
  c.per_run_members = 50;
  c.per_run_non_members = 50;
  c.graybox = true;
  c.train_members = 10;
  c.train_non_members = 10;
  EXPECT_EQ(RunProtocol(NoisyOracle(), split, c).status().code(),
            absl::StatusCode::kInvalidArgument);
  c.eval_pool_members = 60;
  c.eval_pool_non_members = 60;
  ProtocolResult r = *RunProtocol(NoisyOracle(), split, c);
  EXPECT_EQ(r.report.attack_calls, 120u);
  EXPECT_TRUE(r.report.graybox_auc.has_value());
}

TEST(ProtocolTest, ConfigErrors) {
  CorpusSplit split = MakeSplit(10, 10);
  ProtocolConfig c = SmallConfig();
  EXPECT_EQ(RunProtocol(NoisyOracle(), split, c).status().code(),
            absl::StatusCode::kOutOfRange);
  c.per_run_members = 500;
  EXPECT_EQ(ValidateProtocolConfig(c).code(), absl::StatusCode::kInvalidArgument);
  c = SmallConfig();
  c.runs = 0;
  EXPECT_FALSE(ValidateProtocolConfig(c).ok());
}

TEST(ProtocolTest, AttackFailureNamesTheDocument) {
  CorpusSplit split = MakeSplit(300, 300);
  AttackFn failing = [](const Document& d) -> absl::StatusOr<AttackOutcome> {
    if (d.id == "m7") return absl::UnavailableError("backend down");
    return NoisyOracle()(d);
  };
  ProtocolConfig c = SmallConfig();
  c.eval_pool_members = 300;
  c.per_run_members = 300;
  auto r = RunProtocol(failing, split, c);
  ASSERT_FALSE(r.ok());
  EXPECT_EQ(r.status().code(), absl::StatusCode::kUnavailable);
  EXPECT_NE(r.status().message().find("m7"), std::string::npos);
}

TEST(ProtocolTest, RecordJsonRoundTripAndMetricsReplay) {
  CorpusSplit split = MakeSplit(300, 300);
  ProtocolConfig c = SmallConfig();
  c.graybox = true;
  ProtocolResult r = *RunProtocol(NoisyOracle(), split, c);
  std::vector<MembershipRecord> back;
  for (const auto& rec : r.records) {
    ASSERT_OK_AND_ASSIGN(MembershipRecord b,
                         RecordFromJson(nlohmann::json::parse(
                             RecordToJson(rec).dump())));
    EXPECT_EQ(b, rec);
    back.push_back(b);
  }
  ASSERT_OK_AND_ASSIGN(MetricsReport replayed, MetricsFromRecords(back, r.report));
  EXPECT_EQ(replayed, r.report);
}

TEST(ProtocolTest, MalformedRecords) {
  EXPECT_EQ(RecordFromJson(nlohmann::json::parse(R"({"run": 0})")).status().code(),
            absl::StatusCode::kDataLoss);
  EXPECT_EQ(RecordFromJson(nlohmann::json::parse(
                               R"({"sample_id":"a","run":0,"truth":"maybe",
                                   "verdict":"yes","blackbox":true})"))
                .status()
                .code(),
            absl::StatusCode::kDataLoss);
  EXPECT_EQ(MetricsFromRecords({}, {}).status().code(), absl::StatusCode::kNotFound);
}

class RagAttackTest : public ::testing::Test {
 protected:
  void SetUp() override {
    SyntheticCorpusOptions opts;
    opts.count = 400;
    docs_ = SynthesizeCorpus(opts);
    split_ = *SplitMembers(docs_, 200, 3);
    index_ = *RetrievalIndex::Build(split_.members, embedder_);
    generator_ = std::make_unique<SimGenerator>(SimGeneratorConfig{});
    system_.index = &*index_;
    system_.embedder = &embedder_;
    system_.generator = generator_.get();
    system_.rag_template = BuiltinTemplate(TemplateKind::kPlain);
  }

  std::vector<Document> docs_;
  CorpusSplit split_;
  SimEmbedder embedder_;
  std::optional<RetrievalIndex> index_;
  std::unique_ptr<SimGenerator> generator_;
  RagSystem system_;
};

TEST_F(RagAttackTest, EndToEndAgainstTheSimulator) {
  RagAttackOptions opts;
  opts.graybox = true;
  opts.audit = true;
  ASSERT_OK_AND_ASSIGN(AttackFn attack, MakeRagAttack(system_, opts));
  ProtocolConfig c;
  c.eval_pool_members = 150;
  c.eval_pool_non_members = 150;
  c.runs = 3;
  c.per_run_members = 50;
  c.per_run_non_members = 50;
  c.train_members = 50;
  c.train_non_members = 50;
  c.graybox = true;
  c.ensemble.size = 10;
  ASSERT_OK_AND_ASSIGN(ProtocolResult r, RunProtocol(attack, split_, c));
  EXPECT_EQ(r.audit_lines.size(), r.report.attack_calls);
  EXPECT_GT(r.report.blackbox_tpr, r.report.blackbox_fpr);
  EXPECT_GT(*r.report.graybox_auc, 0.8);
}

TEST_F(RagAttackTest, OptionErrors) {
  RagAttackOptions opts;
  opts.format_id = 9;
  EXPECT_EQ(MakeRagAttack(system_, opts).status().code(),
            absl::StatusCode::kInvalidArgument);
  RagSystem broken = system_;
  broken.index = nullptr;
  EXPECT_FALSE(MakeRagAttack(broken, {}).ok());
}

// A backend without log-probabilities cannot be attacked in gray-box mode.
class NoLogprobs final : public Generator {
 public:
  std::string name() const override { return "plain"; }
  bool SupportsLogprobs() const override { return false; }
  absl::StatusOr<GenerationResult> Generate(std::string_view,
                                            const GenerateOptions&) override {
    return GenerationResult{"Yes", {}, false};
  }
};

TEST_F(RagAttackTest, GrayboxNeedsLogprobs) {
  NoLogprobs gen;
  RagSystem s = system_;
  s.generator = &gen;
  RagAttackOptions opts;
  opts.graybox = true;
  auto r = MakeRagAttack(s, opts);
  EXPECT_EQ(r.status().code(), absl::StatusCode::kFailedPrecondition);
  EXPECT_EQ(r.status().message(), "gray-box requires token log-probabilities");
  opts.graybox = false;
  EXPECT_TRUE(MakeRagAttack(s, opts).ok());
}

}  // namespace
}  // namespace ragaudit
