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

// Per-cell metrics reports and the tabular layouts built from them.

#ifndef RAGAUDIT_REPORT_H_
#define RAGAUDIT_REPORT_H_

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "ragaudit/metrics.h"

namespace ragaudit {

// One grid cell: (dataset, backend, prompt_id, template_kind, mode).
struct CellKey {
  std::string dataset;
  std::string backend;
  int prompt_id = 0;
  std::string template_kind = "plain";
  std::string mode = "blackbox";

  // "dataset__backend__p<id>__template__mode".
  std::string Id() const;

  friend bool operator==(const CellKey&, const CellKey&) = default;
};

struct RunMetrics {
  int run = 0;
  double blackbox_tpr = 0.0;
  double blackbox_fpr = 0.0;
  double blackbox_auc = 0.0;
  std::optional<double> graybox_auc;
  std::optional<double> graybox_tpr_at_fpr0;
  MissingStats missing;

  friend bool operator==(const RunMetrics&, const RunMetrics&) = default;
};

struct MetricsReport {
  CellKey cell;
  uint64_t seed = 0;
  std::string config_hash;
  // False for remote backends; such runs carry published reference values.
  bool simulated = true;

  std::vector<RunMetrics> runs;
  // Means over `runs`.
  double blackbox_tpr = 0.0;
  double blackbox_fpr = 0.0;
  double blackbox_auc = 0.0;
  std::optional<double> graybox_auc;
  std::optional<double> graybox_tpr_at_fpr0;
  // Over every distinct attacked sample.
  MissingStats missing;
  std::optional<double> retrieval_match_member_percent;
  std::optional<double> retrieval_match_non_member_percent;
  size_t attack_calls = 0;

  friend bool operator==(const MetricsReport&, const MetricsReport&) = default;
};

// Fills the mean fields from `runs`.
void AverageRuns(MetricsReport& report);

nlohmann::json ReportToJson(const MetricsReport& report);
absl::StatusOr<MetricsReport> ReportFromJson(const nlohmann::json& j);

enum class ReportLayout { kSummaryTable, kFullTable, kDefenseTable };

std::string_view ReportLayoutName(ReportLayout layout);
absl::StatusOr<ReportLayout> ParseReportLayout(std::string_view name);

// Published values for one (dataset, model[, prompt]) row, attached to runs
// against real backends for side-by-side comparison.
struct PublishedReference {
  std::string dataset;
  std::string model;
  // -1 for the best-prompt summary rows.
  int prompt_id = -1;
  double blackbox_tpr = 0.0;
  double blackbox_fpr = 0.0;
  double graybox_tpr_at_low_fpr = 0.0;
  double blackbox_auc = 0.0;
  double graybox_auc = 0.0;
};

// Matches dataset names containing "healthcaremagic" or "enron" and backend
// names containing "flan", "llama" or "mistral", case-insensitively.
// prompt_id < 0 selects the summary row.
std::optional<PublishedReference> FindPublishedReference(
    const std::string& dataset, const std::string& backend, int prompt_id);

struct RenderedTable {
  std::string csv;
  std::string json;
};

// summary_table: one row per (dataset, backend), taken from the cell with
//   the highest gray-box AUC; columns BB TPR, BB FPR, GB TPR@lowFPR, BB AUC,
//   GB AUC.
// full_table: one row per (dataset, backend, prompt) with the same columns.
// defense_table: (without, with) column groups per (dataset, backend,
//   prompt); "without" is the plain template, "with" any defended one.
// Both files start with a header block carrying the seed and config hash.
// Rows missing a required value are reported together in one error.
absl::StatusOr<RenderedTable> RenderReportTable(
    const std::vector<MetricsReport>& reports, ReportLayout layout,
    uint64_t seed, const std::string& config_hash);

}  // namespace ragaudit

#endif  // RAGAUDIT_REPORT_H_
