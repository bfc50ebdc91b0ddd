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

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "ragaudit/status_macros.h"
#include "ragaudit/util.h"

namespace ragaudit {
namespace {

constexpr double kLogisticC[] = {0.01, 0.1, 1.0, 10.0};
constexpr int kTreeDepth[] = {1, 2, 3};
constexpr int kTreeMinLeaf[] = {1, 5, 10};
constexpr int kKnnK[] = {3, 5, 9};
constexpr int kMaxNewtonIterations = 50;

double Sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  double e = std::exp(z);
  return e / (1.0 + e);
}

// Solves a * x = b in place by Gaussian elimination with partial pivoting.
template <size_t N>
std::array<double, N> Solve(std::array<std::array<double, N>, N> a,
                            std::array<double, N> b) {
  for (size_t col = 0; col < N; ++col) {
    size_t pivot = col;
    for (size_t r = col + 1; r < N; ++r) {
      if (std::abs(a[r][col]) > std::abs(a[pivot][col])) pivot = r;
    }
    std::swap(a[col], a[pivot]);
    std::swap(b[col], b[pivot]);
    if (a[col][col] == 0.0) continue;
    for (size_t r = col + 1; r < N; ++r) {
      double f = a[r][col] / a[col][col];
      for (size_t c = col; c < N; ++c) a[r][c] -= f * a[col][c];
      b[r] -= f * b[col];
    }
  }
  std::array<double, N> x{};
  for (size_t i = N; i-- > 0;) {
    double s = b[i];
    for (size_t c = i + 1; c < N; ++c) s -= a[i][c] * x[c];
    x[i] = a[i][i] == 0.0 ? 0.0 : s / a[i][i];
  }
  return x;
}

double Gini(double pos, double total) {
  if (total <= 0) return 0.0;
  double p = pos / total;
  return 2.0 * p * (1.0 - p);
}

template <typename T, size_t N>
T Pick(const T (&grid)[N], Rng& rng) {
  return grid[rng.Below(N)];
}

}  // namespace

FeatureRow ToRow(const GrayBoxFeatures& f) {
  return {static_cast<double>(f.answer_indicator), f.p_selected,
          f.logit_selected, f.class_scaled_logit};
}

std::string_view ModelTypeName(ModelType type) {
  switch (type) {
    case ModelType::kLogistic:
      return "logistic";
    case ModelType::kTree:
      return "tree";
    case ModelType::kKnn:
      return "knn";
  }
  return "logistic";
}

std::string_view ScalingName(Scaling scaling) {
  switch (scaling) {
    case Scaling::kNone:
      return "none";
    case Scaling::kStandardize:
      return "standardize";
    case Scaling::kMinMax:
      return "minmax";
  }
  return "none";
}

AttackModelSpec DrawModelSpec(uint64_t seed) {
  Rng rng(seed);
  AttackModelSpec spec;
  spec.seed = seed;
  spec.type = static_cast<ModelType>(rng.Below(3));
  spec.scaling = static_cast<Scaling>(rng.Below(3));
  spec.c = Pick(kLogisticC, rng);
  spec.max_depth = Pick(kTreeDepth, rng);
  spec.min_leaf = Pick(kTreeMinLeaf, rng);
  spec.k = Pick(kKnnK, rng);
  return spec;
}

FeatureRow AttackModel::Prepare(const FeatureRow& row) const {
  FeatureRow out;
  for (size_t i = 0; i < kNumFeatures; ++i) {
    out[i] = mask_[i] ? (row[i] - offset_[i]) / scale_[i] : 0.0;
  }
  return out;
}

void AttackModel::FitScaler(const std::vector<FeatureRow>& rows) {
  offset_.fill(0.0);
  scale_.fill(1.0);
  if (spec_.scaling == Scaling::kNone || rows.empty()) return;
  for (size_t i = 0; i < kNumFeatures; ++i) {
    if (spec_.scaling == Scaling::kStandardize) {
      double mean = 0.0;
      for (const FeatureRow& r : rows) mean += r[i];
      mean /= static_cast<double>(rows.size());
      double var = 0.0;
      for (const FeatureRow& r : rows) var += (r[i] - mean) * (r[i] - mean);
      double sd = std::sqrt(var / static_cast<double>(rows.size()));
      offset_[i] = mean;
      scale_[i] = sd > 0.0 ? sd : 1.0;
    } else {
      double lo = rows[0][i], hi = rows[0][i];
      for (const FeatureRow& r : rows) {
        lo = std::min(lo, r[i]);
        hi = std::max(hi, r[i]);
      }
      offset_[i] = lo;
      scale_[i] = hi > lo ? hi - lo : 1.0;
    }
  }
}

// L2-regularized logistic regression by Newton iterations. The bias is not
// penalized.
void AttackModel::FitLogistic(const std::vector<FeatureRow>& x,
                              const std::vector<bool>& y) {
  constexpr size_t kDim = kNumFeatures + 1;
  const double lambda = 1.0 / spec_.c;
  std::array<double, kDim> w{};
  for (int iter = 0; iter < kMaxNewtonIterations; ++iter) {
    std::array<double, kDim> grad{};
    std::array<std::array<double, kDim>, kDim> hess{};
    for (size_t n = 0; n < x.size(); ++n) {
      std::array<double, kDim> v;
      for (size_t i = 0; i < kNumFeatures; ++i) v[i] = x[n][i];
      v[kNumFeatures] = 1.0;
      double z = 0.0;
      for (size_t i = 0; i < kDim; ++i) z += w[i] * v[i];
      double p = Sigmoid(z);
      double r = p - (y[n] ? 1.0 : 0.0);
      double s = p * (1.0 - p);
      for (size_t i = 0; i < kDim; ++i) {
        grad[i] += r * v[i];
        for (size_t j = 0; j < kDim; ++j) hess[i][j] += s * v[i] * v[j];
      }
    }
    for (size_t i = 0; i < kNumFeatures; ++i) {
      grad[i] += lambda * w[i];
      hess[i][i] += lambda;
    }
    hess[kNumFeatures][kNumFeatures] += 1e-9;
    std::array<double, kDim> step = Solve(hess, grad);
    double max_step = 0.0;
    for (size_t i = 0; i < kDim; ++i) {
      w[i] -= step[i];
      max_step = std::max(max_step, std::abs(step[i]));
    }
    if (max_step < 1e-10) break;
  }
  for (size_t i = 0; i < kNumFeatures; ++i) weights_[i] = w[i];
  bias_ = w[kNumFeatures];
}

int AttackModel::GrowTree(const std::vector<FeatureRow>& x,
                          const std::vector<bool>& y, std::vector<size_t> idx,
                          int depth) {
  double pos = 0;
  for (size_t i : idx) pos += y[i] ? 1 : 0;
  const double total = static_cast<double>(idx.size());
  const int node_id = static_cast<int>(nodes_.size());
  nodes_.push_back({-1, 0.0, -1, -1, pos / total});

  const size_t min_leaf = static_cast<size_t>(std::max(spec_.min_leaf, 1));
  if (depth >= spec_.max_depth || pos == 0 || pos == total ||
      idx.size() < 2 * min_leaf) {
    return node_id;
  }
  const double parent = Gini(pos, total);
  double best_impurity = parent - 1e-12;
  int best_feature = -1;
  double best_threshold = 0.0;
  for (size_t f = 0; f < kNumFeatures; ++f) {
    if (!mask_[f]) continue;
    std::vector<size_t> order = idx;
    std::stable_sort(order.begin(), order.end(),
                     [&](size_t a, size_t b) { return x[a][f] < x[b][f]; });
    double left_pos = 0;
    for (size_t n = 0; n + 1 < order.size(); ++n) {
      left_pos += y[order[n]] ? 1 : 0;
      const double lo = x[order[n]][f], hi = x[order[n + 1]][f];
      if (lo == hi) continue;
      size_t left_count = n + 1;
      size_t right_count = order.size() - left_count;
      if (left_count < min_leaf || right_count < min_leaf) continue;
      double lc = static_cast<double>(left_count);
      double rc = static_cast<double>(right_count);
      double impurity = (lc * Gini(left_pos, lc) +
                         rc * Gini(pos - left_pos, rc)) / total;
      if (impurity < best_impurity) {
        best_impurity = impurity;
        best_feature = static_cast<int>(f);
        best_threshold = lo + (hi - lo) / 2.0;
      }
    }
  }
  if (best_feature < 0) return node_id;
  std::vector<size_t> left, right;
  for (size_t i : idx) {
    (x[i][best_feature] <= best_threshold ? left : right).push_back(i);
  }
  int l = GrowTree(x, y, std::move(left), depth + 1);
  int r = GrowTree(x, y, std::move(right), depth + 1);
  nodes_[node_id].feature = best_feature;
  nodes_[node_id].threshold = best_threshold;
  nodes_[node_id].left = l;
  nodes_[node_id].right = r;
  return node_id;
}

absl::StatusOr<AttackModel> AttackModel::Train(
    const AttackModelSpec& spec, const std::vector<FeatureRow>& rows,
    const std::vector<bool>& labels,
    const std::array<bool, kNumFeatures>& mask) {
  if (rows.empty() || rows.size() != labels.size()) {
    return absl::InvalidArgumentError("attack model needs labeled rows");
  }
  AttackModel model;
  model.spec_ = spec;
  model.mask_ = mask;
  model.FitScaler(rows);
  std::vector<FeatureRow> x;
  x.reserve(rows.size());
  for (const FeatureRow& r : rows) x.push_back(model.Prepare(r));
  switch (spec.type) {
    case ModelType::kLogistic:
      model.FitLogistic(x, labels);
      break;
    case ModelType::kTree: {
      std::vector<size_t> idx(x.size());
      for (size_t i = 0; i < idx.size(); ++i) idx[i] = i;
      model.GrowTree(x, labels, std::move(idx), 0);
      break;
    }
    case ModelType::kKnn:
      model.points_ = std::move(x);
      model.point_labels_ = labels;
      break;
  }
  return model;
}

AttackModel AttackModel::Logistic(
    const std::array<double, kNumFeatures>& weights, double bias) {
  AttackModel model;
  model.spec_.type = ModelType::kLogistic;
  model.weights_ = weights;
  model.bias_ = bias;
  return model;
}

double AttackModel::PredictProba(const FeatureRow& row) const {
  const FeatureRow x = Prepare(row);
  switch (spec_.type) {
    case ModelType::kLogistic: {
      double z = bias_;
      for (size_t i = 0; i < kNumFeatures; ++i) z += weights_[i] * x[i];
      return Sigmoid(z);
    }
    case ModelType::kTree: {
      if (nodes_.empty()) return 0.5;
      int n = 0;
      while (nodes_[n].feature >= 0) {
        n = x[nodes_[n].feature] <= nodes_[n].threshold ? nodes_[n].left
                                                        : nodes_[n].right;
      }
      return nodes_[n].prob;
    }
    case ModelType::kKnn: {
      if (points_.empty()) return 0.5;
      std::vector<std::pair<double, size_t>> d;
      d.reserve(points_.size());
      for (size_t i = 0; i < points_.size(); ++i) {
        double s = 0.0;
        for (size_t f = 0; f < kNumFeatures; ++f) {
          double diff = points_[i][f] - x[f];
          s += diff * diff;
        }
        d.emplace_back(s, i);
      }
      size_t k = std::min(static_cast<size_t>(std::max(spec_.k, 1)), d.size());
      std::partial_sort(d.begin(), d.begin() + k, d.end());
      double members = 0;
      for (size_t i = 0; i < k; ++i) members += point_labels_[d[i].second] ? 1 : 0;
      return members / static_cast<double>(k);
    }
  }
  return 0.5;
}

nlohmann::json AttackModel::ToJson() const {
  nlohmann::json j;
  j["type"] = std::string(ModelTypeName(spec_.type));
  j["scaling"] = std::string(ScalingName(spec_.scaling));
  j["c"] = spec_.c;
  j["max_depth"] = spec_.max_depth;
  j["min_leaf"] = spec_.min_leaf;
  j["k"] = spec_.k;
  j["seed"] = spec_.seed;
  j["mask"] = mask_;
  j["offset"] = offset_;
  j["scale"] = scale_;
  switch (spec_.type) {
    case ModelType::kLogistic:
      j["weights"] = weights_;
      j["bias"] = bias_;
      break;
    case ModelType::kTree: {
      nlohmann::json nodes = nlohmann::json::array();
      for (const TreeNode& n : nodes_) {
        nodes.push_back({n.feature, n.threshold, n.left, n.right, n.prob});
      }
      j["nodes"] = std::move(nodes);
      break;
    }
    case ModelType::kKnn:
      j["points"] = points_;
      j["labels"] = point_labels_;
      break;
  }
  return j;
}

absl::StatusOr<AttackModel> AttackModel::FromJson(const nlohmann::json& j) {
  try {
    AttackModel m;
    const std::string type = j.at("type").get<std::string>();
    const std::string scaling = j.at("scaling").get<std::string>();
    if (type == "logistic") {
      m.spec_.type = ModelType::kLogistic;
    } else if (type == "tree") {
      m.spec_.type = ModelType::kTree;
    } else if (type == "knn") {
      m.spec_.type = ModelType::kKnn;
    } else {
      return absl::InvalidArgumentError(absl::StrCat("unknown model type ", type));
    }
    if (scaling == "none") {
      m.spec_.scaling = Scaling::kNone;
    } else if (scaling == "standardize") {
      m.spec_.scaling = Scaling::kStandardize;
    } else if (scaling == "minmax") {
      m.spec_.scaling = Scaling::kMinMax;
    } else {
      return absl::InvalidArgumentError(absl::StrCat("unknown scaling ", scaling));
    }
    m.spec_.c = j.at("c").get<double>();
    m.spec_.max_depth = j.at("max_depth").get<int>();
    m.spec_.min_leaf = j.at("min_leaf").get<int>();
    m.spec_.k = j.at("k").get<int>();
    m.spec_.seed = j.at("seed").get<uint64_t>();
    m.mask_ = j.at("mask").get<std::array<bool, kNumFeatures>>();
    m.offset_ = j.at("offset").get<FeatureRow>();
    m.scale_ = j.at("scale").get<FeatureRow>();
    switch (m.spec_.type) {
      case ModelType::kLogistic:
        m.weights_ = j.at("weights").get<std::array<double, kNumFeatures>>();
        m.bias_ = j.at("bias").get<double>();
        break;
      case ModelType::kTree:
        for (const auto& n : j.at("nodes")) {
          m.nodes_.push_back({n.at(0).get<int>(), n.at(1).get<double>(),
                              n.at(2).get<int>(), n.at(3).get<int>(),
                              n.at(4).get<double>()});
        }
        for (const TreeNode& n : m.nodes_) {
          const int count = static_cast<int>(m.nodes_.size());
          if (n.feature >= static_cast<int>(kNumFeatures) ||
              (n.feature >= 0 && (n.left < 0 || n.left >= count ||
                                  n.right < 0 || n.right >= count))) {
            return absl::InvalidArgumentError("malformed tree");
          }
        }
        break;
      case ModelType::kKnn:
        m.points_ = j.at("points").get<std::vector<FeatureRow>>();
        m.point_labels_ = j.at("labels").get<std::vector<bool>>();
        if (m.points_.size() != m.point_labels_.size()) {
          return absl::InvalidArgumentError("kNN points and labels differ");
        }
        break;
    }
    return m;
  } catch (const nlohmann::json::exception& e) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed attack model: ", e.what()));
  }
}

absl::StatusOr<AttackEnsemble> AttackEnsemble::Train(
    const std::vector<LabeledFeatures>& records, const EnsembleOptions& options) {
  if (options.size == 0) {
    return absl::InvalidArgumentError("ensemble size must be at least 1");
  }
  std::vector<size_t> members, non_members;
  for (size_t i = 0; i < records.size(); ++i) {
    (records[i].member ? members : non_members).push_back(i);
  }
  if (members.empty() || non_members.empty()) {
    return absl::InvalidArgumentError(
        "attack training data must contain both members and non-members");
  }
  auto take = [&](size_t n) {
    return std::max<size_t>(
        1, static_cast<size_t>(std::ceil(options.subset_fraction *
                                         static_cast<double>(n))));
  };
  const size_t take_members = std::min(take(members.size()), members.size());
  const size_t take_non = std::min(take(non_members.size()), non_members.size());

  std::vector<absl::StatusOr<AttackModel>> trained(
      options.size, absl::UnknownError("not trained"));
  ParallelFor(options.size, options.threads, [&](size_t m) {
    const uint64_t model_seed = MixSeed(options.seed, m);
    AttackModelSpec spec = DrawModelSpec(model_seed);
    Rng rng(MixSeed(model_seed, 0x5eed));
    std::vector<FeatureRow> rows;
    std::vector<bool> labels;
    for (size_t i : rng.SampleIndices(members.size(), take_members)) {
      rows.push_back(ToRow(records[members[i]].features));
      labels.push_back(true);
    }
    for (size_t i : rng.SampleIndices(non_members.size(), take_non)) {
      rows.push_back(ToRow(records[non_members[i]].features));
      labels.push_back(false);
    }
    trained[m] = AttackModel::Train(spec, rows, labels, options.feature_mask);
  });
  AttackEnsemble ensemble;
  for (auto& model : trained) {
    if (!model.ok()) return model.status();
    ensemble.models_.push_back(*std::move(model));
  }
  return ensemble;
}

AttackEnsemble AttackEnsemble::FromModels(std::vector<AttackModel> models) {
  AttackEnsemble e;
  e.models_ = std::move(models);
  return e;
}

absl::StatusOr<double> AttackEnsemble::Score(
    const GrayBoxFeatures& features) const {
  if (models_.empty()) {
    return absl::FailedPreconditionError("attack ensemble is not trained");
  }
  const FeatureRow row = ToRow(features);
  std::vector<double> probs;
  probs.reserve(models_.size());
  for (const AttackModel& m : models_) probs.push_back(m.PredictProba(row));
  // Summing in sorted order makes the mean independent of model order.
  std::sort(probs.begin(), probs.end());
  double sum = 0.0;
  for (double p : probs) sum += p;
  return sum / static_cast<double>(probs.size());
}

nlohmann::json AttackEnsemble::ToJson() const {
  nlohmann::json j;
  j["aggregation"] = "mean";
  nlohmann::json models = nlohmann::json::array();
  for (const AttackModel& m : models_) models.push_back(m.ToJson());
  j["models"] = std::move(models);
  return j;
}

absl::StatusOr<AttackEnsemble> AttackEnsemble::FromJson(const nlohmann::json& j) {
  if (!j.contains("models") || !j["models"].is_array()) {
    return absl::InvalidArgumentError("ensemble JSON lacks a models array");
  }
  AttackEnsemble e;
  for (const auto& mj : j["models"]) {
    RAGAUDIT_ASSIGN_OR_RETURN(AttackModel m, AttackModel::FromJson(mj));
    e.models_.push_back(std::move(m));
  }
  return e;
}

}  // namespace ragaudit
