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

// Ensemble of small binary attack models over gray-box features. Each member
// draws its model type, feature scaling and hyper-parameters from a fixed grid
// and trains on its own stratified half of the labeled records; the ensemble
// score is the mean member probability.

#ifndef RAGAUDIT_ATTACK_MODEL_H_
#define RAGAUDIT_ATTACK_MODEL_H_

#include <array>
#include <cstdint>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "ragaudit/attack.h"

namespace ragaudit {

inline constexpr size_t kNumFeatures = 4;
using FeatureRow = std::array<double, kNumFeatures>;

// Order: answer indicator, p_selected, logit, class-scaled logit.
FeatureRow ToRow(const GrayBoxFeatures& f);

struct LabeledFeatures {
  GrayBoxFeatures features;
  bool member = false;
};

enum class ModelType { kLogistic, kTree, kKnn };
enum class Scaling { kNone, kStandardize, kMinMax };

std::string_view ModelTypeName(ModelType type);
std::string_view ScalingName(Scaling scaling);

struct AttackModelSpec {
  ModelType type = ModelType::kLogistic;
  Scaling scaling = Scaling::kNone;
  // Logistic: inverse L2 strength.
  double c = 1.0;
  // Tree.
  int max_depth = 3;
  int min_leaf = 1;
  // kNN.
  int k = 5;
  uint64_t seed = 0;
};

class AttackModel {
 public:
  // Trains on `rows`; features with mask[i] == false are zeroed first.
  static absl::StatusOr<AttackModel> Train(const AttackModelSpec& spec,
                                           const std::vector<FeatureRow>& rows,
                                           const std::vector<bool>& labels,
                                           const std::array<bool, kNumFeatures>& mask);

  // Logistic model with fixed parameters and no scaling.
  static AttackModel Logistic(const std::array<double, kNumFeatures>& weights,
                              double bias);

  const AttackModelSpec& spec() const { return spec_; }

  // Member probability in [0, 1].
  double PredictProba(const FeatureRow& row) const;

  nlohmann::json ToJson() const;
  static absl::StatusOr<AttackModel> FromJson(const nlohmann::json& j);

 private:
  struct TreeNode {
    int feature = -1;  // -1 for leaves
    double threshold = 0.0;
    int left = -1;
    int right = -1;
    double prob = 0.0;
  };

  FeatureRow Prepare(const FeatureRow& row) const;
  void FitScaler(const std::vector<FeatureRow>& rows);
  void FitLogistic(const std::vector<FeatureRow>& x, const std::vector<bool>& y);
  int GrowTree(const std::vector<FeatureRow>& x, const std::vector<bool>& y,
               std::vector<size_t> idx, int depth);

  AttackModelSpec spec_;
  std::array<bool, kNumFeatures> mask_{true, true, true, true};
  FeatureRow offset_{};
  FeatureRow scale_{1.0, 1.0, 1.0, 1.0};
  // Logistic.
  std::array<double, kNumFeatures> weights_{};
  double bias_ = 0.0;
  // Tree.
  std::vector<TreeNode> nodes_;
  // kNN.
  std::vector<FeatureRow> points_;
  std::vector<bool> point_labels_;
};

struct EnsembleOptions {
  size_t size = 40;
  uint64_t seed = 0;
  double subset_fraction = 0.5;
  std::array<bool, kNumFeatures> feature_mask{true, true, true, true};
  // Worker threads for training; results do not depend on it.
  size_t threads = 1;
};

// Draws one member's spec from the hyper-parameter grid.
AttackModelSpec DrawModelSpec(uint64_t seed);

class AttackEnsemble {
 public:
  AttackEnsemble() = default;

  // Fails when either class is absent or size is zero.
  static absl::StatusOr<AttackEnsemble> Train(
      const std::vector<LabeledFeatures>& records,
      const EnsembleOptions& options);

  static AttackEnsemble FromModels(std::vector<AttackModel> models);

  size_t size() const { return models_.size(); }
  const std::vector<AttackModel>& models() const { return models_; }

  // Mean member probability. FailedPrecondition for an untrained ensemble.
  absl::StatusOr<double> Score(const GrayBoxFeatures& features) const;

  nlohmann::json ToJson() const;
  static absl::StatusOr<AttackEnsemble> FromJson(const nlohmann::json& j);

 private:
  std::vector<AttackModel> models_;
};

}  // namespace ragaudit

#endif  // RAGAUDIT_ATTACK_MODEL_H_
