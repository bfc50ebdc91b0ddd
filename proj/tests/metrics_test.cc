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

#include "ragaudit/metrics.h"

#include <cmath>
#include <limits>
#include <vector>

#include "gtest/gtest.h"
#include "ragaudit/util.h"
#include "test_util.h"

namespace ragaudit {
namespace {

// O(M*N) pairwise definition.
double PairwiseAuc(const std::vector<double>& s, const std::vector<bool>& y) {
  double wins = 0;
  double pairs = 0;
  for (size_t i = 0; i < s.size(); ++i) {
    if (!y[i]) continue;
    for (size_t j = 0; j < s.size(); ++j) {
      if (y[j]) continue;
      pairs += 1;
      if (s[i] > s[j]) wins += 1;
      if (s[i] == s[j]) wins += 0.5;
    }
  }
  return wins / pairs;
}

// Best member recall over every threshold "score >= t" that admits no
// non-member, t ranging over all observed scores and +inf.
double SweepTprAtFprZero(const std::vector<double>& s,
                         const std::vector<bool>& y) {
  std::vector<double> thresholds = s;
  thresholds.push_back(std::numeric_limits<double>::infinity());
  double best = 0;
  size_t members = 0;
  for (bool b : y) members += b;
  for (double t : thresholds) {
    size_t tp = 0;
    size_t fp = 0;
    for (size_t i = 0; i < s.size(); ++i) {
      if (s[i] >= t) (y[i] ? tp : fp)++;
    }
    if (fp == 0) best = std::max(best, static_cast<double>(tp) / members);
  }
  return best;
}

struct Instance {
  std::vector<double> scores;
  std::vector<bool> labels;
};

// Small instances with heavy ties: scores come from a handful of levels.
Instance RandomInstance(Rng& rng) {
  Instance inst;
  const size_t n = 2 + rng.Below(29);
  const uint64_t levels = 1 + rng.Below(8);
  for (size_t i = 0; i < n; ++i) {
    inst.scores.push_back(static_cast<double>(rng.Below(levels)) / 4.0);
    inst.labels.push_back(rng.Bernoulli(0.5));
  }
  inst.labels[0] = true;
  inst.labels[1] = false;
  return inst;
}

TEST(AucRocTest, MatchesPairwiseOracleWithTies) {
  Rng rng(2024);
  for (int trial = 0; trial < 200; ++trial) {
    Instance inst = RandomInstance(rng);
    ASSERT_OK_AND_ASSIGN(double auc, AucRoc(inst.scores, inst.labels));
    EXPECT_NEAR(auc, PairwiseAuc(inst.scores, inst.labels), 1e-12)
        << "trial " << trial;
  }
}

TEST(AucRocTest, KnownValues) {
  // Perfect separation, reversed separation, all tied.
  EXPECT_DOUBLE_EQ(*AucRoc({0.9, 0.8, 0.1, 0.2}, {true, true, false, false}),
                   1.0);
  EXPECT_DOUBLE_EQ(*AucRoc({0.1, 0.2, 0.9, 0.8}, {true, true, false, false}),
                   0.0);
  EXPECT_DOUBLE_EQ(*AucRoc({0.5, 0.5, 0.5}, {true, false, false}), 0.5);
}

TEST(AucRocTest, InvariantUnderMonotoneTransform) {
  Rng rng(7);
  for (int trial = 0; trial < 50; ++trial) {
    Instance inst = RandomInstance(rng);
    std::vector<double> transformed;
    for (double s : inst.scores) transformed.push_back(std::exp(3 * s) - 10);
    EXPECT_NEAR(*AucRoc(inst.scores, inst.labels),
                *AucRoc(transformed, inst.labels), 1e-12);
  }
}

TEST(AucRocTest, ComplementLabelsSumToOne) {
  Rng rng(8);
  for (int trial = 0; trial < 50; ++trial) {
    Instance inst = RandomInstance(rng);
    std::vector<bool> flipped;
    for (bool b : inst.labels) flipped.push_back(!b);
    EXPECT_NEAR(*AucRoc(inst.scores, inst.labels) +
                    *AucRoc(inst.scores, flipped),
                1.0, 1e-12);
  }
}

TEST(AucRocTest, BinaryScoresGiveBalancedAccuracy) {
  // With one operating point the tie-aware AUC is (TPR + 1 - FPR) / 2.
  Rng rng(9);
  for (int trial = 0; trial < 50; ++trial) {
    std::vector<bool> pred;
    std::vector<bool> labels;
    std::vector<double> scores;
    for (int i = 0; i < 40; ++i) {
      pred.push_back(rng.Bernoulli(0.5));
      labels.push_back(i % 2 == 0);
      scores.push_back(pred.back() ? 1.0 : 0.0);
    }
    ASSERT_OK_AND_ASSIGN(TprFpr r, BinaryTprFpr(pred, labels));
    EXPECT_NEAR(*AucRoc(scores, labels), (r.tpr + 1 - r.fpr) / 2, 1e-12);
  }
}

TEST(AucRocTest, RejectsSingleClassAndSizeMismatch) {
  EXPECT_EQ(AucRoc({0.1, 0.2}, {true, true}).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(AucRoc({0.1}, {true, false}).status().code(),
            absl::StatusCode::kInvalidArgument);
  EXPECT_EQ(TprAtFprZero({}, {}).status().code(),
            absl::StatusCode::kInvalidArgument);
}

TEST(TprAtFprZeroTest, MatchesThresholdSweep) {
  Rng rng(2025);
  for (int trial = 0; trial < 200; ++trial) {
    Instance inst = RandomInstance(rng);
    ASSERT_OK_AND_ASSIGN(double tpr, TprAtFprZero(inst.scores, inst.labels));
    EXPECT_NEAR(tpr, SweepTprAtFprZero(inst.scores, inst.labels), 1e-12)
        << "trial " << trial;
  }
}

TEST(TprAtFprZeroTest, TiesWithTopNonMemberDoNotCount) {
  // Member at 0.8 ties the best non-member, so only the 0.9 member counts.
  EXPECT_DOUBLE_EQ(
      *TprAtFprZero({0.9, 0.8, 0.8, 0.1}, {true, true, false, false}), 0.5);
}

TEST(TprAtFprZeroTest, NeverExceedsTprAtAnyPositiveFpr) {
  Rng rng(11);
  for (int trial = 0; trial < 100; ++trial) {
    Instance inst = RandomInstance(rng);
    const double at_zero = *TprAtFprZero(inst.scores, inst.labels);
    for (double t : inst.scores) {
      std::vector<bool> pred;
      for (double s : inst.scores) pred.push_back(s >= t);
      TprFpr r = *BinaryTprFpr(pred, inst.labels);
      if (r.fpr > 0) {
        EXPECT_LE(at_zero, r.tpr + 1e-12);
      }
    }
  }
}

TEST(BinaryTprFprTest, CountsDirectly) {
  ASSERT_OK_AND_ASSIGN(
      TprFpr r, BinaryTprFpr({true, true, false, true, false, false},
                             {true, true, true, false, false, false}));
  EXPECT_DOUBLE_EQ(r.tpr, 2.0 / 3.0);
  EXPECT_DOUBLE_EQ(r.fpr, 1.0 / 3.0);
}

TEST(MissingStatsTest, Counts) {
  MissingStats none = ComputeMissingStats({false, false});
  EXPECT_EQ(none.missing, 0u);
  EXPECT_DOUBLE_EQ(none.percent, 0.0);
  MissingStats some = ComputeMissingStats({true, false, false, true});
  EXPECT_EQ(some.missing, 2u);
  EXPECT_EQ(some.total, 4u);
  EXPECT_DOUBLE_EQ(some.percent, 50.0);
  EXPECT_DOUBLE_EQ(ComputeMissingStats({}).percent, 0.0);
}

TEST(MissingStatsTest, PublishedRatioArithmetic) {
  // 923 of 20,000 answers without Yes/No is 4.615%, printed as 4.62%.
  std::vector<bool> flags(20000, false);
  for (int i = 0; i < 923; ++i) flags[i] = true;
  EXPECT_NEAR(ComputeMissingStats(flags).percent, 4.615, 1e-9);
}

}  // namespace
}  // namespace ragaudit
