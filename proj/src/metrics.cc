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

#include <algorithm>
#include <limits>
#include <numeric>

#include "absl/strings/str_cat.h"

namespace ragaudit {
namespace {

absl::Status CheckBothClasses(size_t values, const std::vector<bool>& labels) {
  if (values != labels.size()) {
    return absl::InvalidArgumentError(absl::StrCat(
        values, " values but ", labels.size(), " labels"));
  }
  const size_t members = std::count(labels.begin(), labels.end(), true);
  if (members == 0 || members == labels.size()) {
    return absl::InvalidArgumentError(
        "metric needs both members and non-members");
  }
  return absl::OkStatus();
}

}  // namespace

absl::StatusOr<double> AucRoc(const std::vector<double>& scores,
                              const std::vector<bool>& labels) {
  if (absl::Status s = CheckBothClasses(scores.size(), labels); !s.ok()) {
    return s;
  }
  // Rank-sum form with midranks for ties; O(n log n).
  std::vector<size_t> order(scores.size());
  std::iota(order.begin(), order.end(), 0);
  std::sort(order.begin(), order.end(),
            [&](size_t a, size_t b) { return scores[a] < scores[b]; });
  double member_rank_sum = 0.0;
  size_t members = 0;
  for (size_t i = 0; i < order.size();) {
    size_t j = i;
    while (j < order.size() && scores[order[j]] == scores[order[i]]) ++j;
    // 1-based ranks i+1 .. j share their mean.
    const double midrank = (static_cast<double>(i + 1) + j) / 2.0;
    for (size_t t = i; t < j; ++t) {
      if (labels[order[t]]) {
        member_rank_sum += midrank;
        ++members;
      }
    }
    i = j;
  }
  const double m = static_cast<double>(members);
  const double n = static_cast<double>(scores.size() - members);
  return (member_rank_sum - m * (m + 1.0) / 2.0) / (m * n);
}

absl::StatusOr<double> TprAtFprZero(const std::vector<double>& scores,
                                    const std::vector<bool>& labels) {
  if (absl::Status s = CheckBothClasses(scores.size(), labels); !s.ok()) {
    return s;
  }
  double threshold = -std::numeric_limits<double>::infinity();
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) threshold = std::max(threshold, scores[i]);
  }
  size_t members = 0, above = 0;
  for (size_t i = 0; i < scores.size(); ++i) {
    if (!labels[i]) continue;
    ++members;
    if (scores[i] > threshold) ++above;
  }
  return static_cast<double>(above) / static_cast<double>(members);
}

absl::StatusOr<TprFpr> BinaryTprFpr(const std::vector<bool>& predictions,
                                    const std::vector<bool>& labels) {
  if (absl::Status s = CheckBothClasses(predictions.size(), labels); !s.ok()) {
    return s;
  }
  size_t tp = 0, fn = 0, fp = 0, tn = 0;
  for (size_t i = 0; i < labels.size(); ++i) {
    if (labels[i]) {
      predictions[i] ? ++tp : ++fn;
    } else {
      predictions[i] ? ++fp : ++tn;
    }
  }
  return TprFpr{static_cast<double>(tp) / static_cast<double>(tp + fn),
                static_cast<double>(fp) / static_cast<double>(fp + tn)};
}

MissingStats ComputeMissingStats(const std::vector<bool>& missing_flags) {
  MissingStats stats;
  stats.total = missing_flags.size();
  stats.missing =
      std::count(missing_flags.begin(), missing_flags.end(), true);
  if (stats.total > 0) {
    stats.percent = 100.0 * static_cast<double>(stats.missing) /
                    static_cast<double>(stats.total);
  }
  return stats;
}

}  // namespace ragaudit
