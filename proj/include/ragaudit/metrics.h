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

// Membership-inference metrics. Every function needs both classes present
// and reports InvalidArgument otherwise.

#ifndef RAGAUDIT_METRICS_H_
#define RAGAUDIT_METRICS_H_

#include <cstddef>
#include <vector>

#include "absl/status/statusor.h"

namespace ragaudit {

// Tie-aware Mann-Whitney AUC:
//   (#{(m, n): s_m > s_n} + 0.5 #{s_m = s_n}) / (M N).
absl::StatusOr<double> AucRoc(const std::vector<double>& scores,
                              const std::vector<bool>& labels);

// Fraction of members scoring strictly above the highest non-member score.
absl::StatusOr<double> TprAtFprZero(const std::vector<double>& scores,
                                    const std::vector<bool>& labels);

struct TprFpr {
  double tpr = 0.0;
  double fpr = 0.0;
};

absl::StatusOr<TprFpr> BinaryTprFpr(const std::vector<bool>& predictions,
                                    const std::vector<bool>& labels);

struct MissingStats {
  size_t missing = 0;
  size_t total = 0;
  // 100 * missing / total; 0 for an empty input.
  double percent = 0.0;

  friend bool operator==(const MissingStats&, const MissingStats&) = default;
};

MissingStats ComputeMissingStats(const std::vector<bool>& missing_flags);

}  // namespace ragaudit

#endif  // RAGAUDIT_METRICS_H_
