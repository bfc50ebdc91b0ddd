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

#include "ragaudit/attack_model.h"

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "gtest/gtest.h"
#include "ragaudit/metrics.h"
#include "ragaudit/util.h"
#include "test_util.h"

namespace ragaudit {
namespace {

double Gaussian(Rng& rng) {
  double u1 = std::max(rng.NextDouble(), 1e-300);
  double u2 = rng.NextDouble();
  return std::sqrt(-2 * std::log(u1)) * std::cos(2 * M_PI * u2);
}

// Features as the gray-box pipeline would produce them from a verdict and a
// selected-token probability.
GrayBoxFeatures FromAnswer(bool yes, double p) {
  GrayBoxFeatures f;
  f.answer_indicator = yes ? 1 : -1;
  f.p_selected = p;
  f.logit_selected = std::log(p / (1 - p));
  f.class_scaled_logit = f.answer_indicator * f.logit_selected;
  return f;
}

// Overlapping classes: the latent member score is N(+0.6, 1) vs N(-0.6, 1).
std::vector<LabeledFeatures> NoisyRecords(size_t n, uint64_t seed) {
  Rng rng(seed);
  std::vector<LabeledFeatures> out;
  for (size_t i = 0; i < n; ++i) {
    const bool member = i % 2 == 0;
    const double z = Gaussian(rng) + (member ? 0.6 : -0.6);
    const bool yes = z > 0;
    const double p = 1 / (1 + std::exp(-(std::abs(z) + 0.5 * Gaussian(rng))));
    out.push_back({FromAnswer(yes, std::clamp(p, 0.5, 0.999)), member});
  }
  return out;
}

double EnsembleAuc(const AttackEnsemble& e,
                   const std::vector<LabeledFeatures>& data) {
  std::vector<double> scores;
  std::vector<bool> labels;
  for (const LabeledFeatures& r : data) {
    scores.push_back(*e.Score(r.features));
    labels.push_back(r.member);
  }
  return *AucRoc(scores, labels);
}

TEST(AttackModelTest, SeparableDataGivesPerfectTrainingAuc) {
  Rng rng(1);
  std::vector<LabeledFeatures> data;
  for (int i = 0; i < 200; ++i) {
    const bool member = i % 2 == 0;
    // Members: Yes with logit >= 2; non-members: No, class-scaled <= -2.
    const double p = 1 / (1 + std::exp(-(2 + 3 * rng.NextDouble())));
    data.push_back({FromAnswer(member, p), member});
  }
  EnsembleOptions opts;
  opts.seed = 3;
  ASSERT_OK_AND_ASSIGN(AttackEnsemble e, AttackEnsemble::Train(data, opts));
  EXPECT_EQ(e.size(), 40u);
  EXPECT_DOUBLE_EQ(EnsembleAuc(e, data), 1.0);
}

TEST(AttackModelTest, SameSeedSameModelsAndScores) {
  auto data = NoisyRecords(300, 2);
  EnsembleOptions opts;
  opts.seed = 9;
  AttackEnsemble a = *AttackEnsemble::Train(data, opts);
  opts.threads = 4;
  AttackEnsemble b = *AttackEnsemble::Train(data, opts);
  EXPECT_EQ(a.ToJson(), b.ToJson());
  for (const auto& r : data) EXPECT_EQ(*a.Score(r.features), *b.Score(r.features));
  opts.seed = 10;
  EXPECT_NE(AttackEnsemble::Train(data, opts)->ToJson(), a.ToJson());
}

TEST(AttackModelTest, SingleClassRejected) {
  auto data = NoisyRecords(20, 3);
  for (auto& r : data) r.member = true;
  EXPECT_EQ(AttackEnsemble::Train(data, {}).status().code(),
            absl::StatusCode::kInvalidArgument);
  EnsembleOptions zero;
  zero.size = 0;
  EXPECT_FALSE(AttackEnsemble::Train(NoisyRecords(20, 3), zero).ok());
}

TEST(AttackModelTest, UntrainedEnsembleCannotScore) {
  AttackEnsemble e;
  EXPECT_EQ(e.Score({}).status().code(), absl::StatusCode::kFailedPrecondition);
}

TEST(AttackModelTest, ScoreIsTheMeanOfMemberProbabilities) {
  // Zero weights: each model outputs sigmoid(bias).
  auto constant = [](double p) {
    return AttackModel::Logistic({0, 0, 0, 0}, std::log(p / (1 - p)));
  };
  AttackEnsemble two = AttackEnsemble::FromModels({constant(0.2), constant(0.8)});
  EXPECT_NEAR(*two.Score({}), 0.5, 1e-12);
  AttackEnsemble ones = AttackEnsemble::FromModels({constant(1 - 1e-15)});
  EXPECT_NEAR(*ones.Score({}), 1.0, 1e-12);

  // Hand-computed three-model fixture.
  std::vector<AttackModel> models = {
      AttackModel::Logistic({0, 0, 1, 0}, 0.0),
      AttackModel::Logistic({0, 0, 0, 2}, -1.0),
      AttackModel::Logistic({1, 0, 0, 0}, 0.5)};
  GrayBoxFeatures f = FromAnswer(true, 0.75);
  const double l = std::log(3.0);
  auto sig = [](double z) { return 1 / (1 + std::exp(-z)); };
  const double expected = (sig(l) + sig(2 * l - 1) + sig(1.5)) / 3;
  EXPECT_NEAR(*AttackEnsemble::FromModels(models).Score(f), expected, 1e-12);

  std::reverse(models.begin(), models.end());
  EXPECT_EQ(*AttackEnsemble::FromModels(models).Score(f),
            *AttackEnsemble::FromModels(
                 {models[2], models[0], models[1]}).Score(f));
}

TEST(AttackModelTest, SpecsComeFromTheGrid) {
  std::set<ModelType> types;
  for (uint64_t s = 0; s < 200; ++s) {
    AttackModelSpec spec = DrawModelSpec(s);
    types.insert(spec.type);
    EXPECT_LE(spec.max_depth, 3);
    EXPECT_TRUE(spec.k == 3 || spec.k == 5 || spec.k == 9);
  }
  EXPECT_EQ(types.size(), 3u);
}

TEST(AttackModelTest, JsonRoundTripPreservesScores) {
  auto data = NoisyRecords(200, 4);
  EnsembleOptions opts;
  opts.seed = 5;
  AttackEnsemble e = *AttackEnsemble::Train(data, opts);
  ASSERT_OK_AND_ASSIGN(AttackEnsemble back, AttackEnsemble::FromJson(e.ToJson()));
  ASSERT_EQ(back.size(), e.size());
  for (const auto& r : data) EXPECT_EQ(*back.Score(r.features), *e.Score(r.features));
}

TEST(AttackModelTest, FeatureMaskRemovesInformation) {
  auto data = NoisyRecords(400, 6);
  EnsembleOptions opts;
  opts.feature_mask = {false, false, false, false};
  AttackEnsemble blind = *AttackEnsemble::Train(data, opts);
  EXPECT_NEAR(EnsembleAuc(blind, data), 0.5, 1e-9);
}

TEST(AttackModelTest, EnsembleAtLeastMedianSingleModelOver20Seeds) {
  int wins = 0;
  for (uint64_t seed = 0; seed < 20; ++seed) {
    auto train = NoisyRecords(400, 100 + seed);
    auto test = NoisyRecords(1000, 200 + seed);
    EnsembleOptions opts;
    opts.seed = seed;
    AttackEnsemble ensemble = *AttackEnsemble::Train(train, opts);
    std::vector<double> singles;
    for (const AttackModel& m : ensemble.models()) {
      singles.push_back(EnsembleAuc(AttackEnsemble::FromModels({m}), test));
    }
    std::sort(singles.begin(), singles.end());
    const double median = (singles[19] + singles[20]) / 2;
    wins += EnsembleAuc(ensemble, test) >= median;
  }
  EXPECT_EQ(wins, 20);
}

}  // namespace
}  // namespace ragaudit
