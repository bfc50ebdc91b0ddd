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

// Experiment orchestration over the (prompt format x template x mode) grid.
//
// Output directory layout:
//   manifest.jsonl            append-only event log
//   config.json               resolved configuration
//   cells/<cell id>/records.jsonl, report.json, audit.jsonl
//   reports/<layout>.csv, reports/<layout>.json

#ifndef RAGAUDIT_EXPERIMENT_H_
#define RAGAUDIT_EXPERIMENT_H_

#include <functional>
#include <map>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "ragaudit/config.h"
#include "ragaudit/report.h"

namespace ragaudit {

enum class CellStatus { kPending, kRunning, kDone, kFailed };

std::string_view CellStatusName(CellStatus status);

struct CellState {
  CellStatus status = CellStatus::kPending;
  std::string config_hash;
  std::string error;
  // File name -> FNV-1a hex of its content, for done cells.
  std::map<std::string, std::string> files;
};

struct Manifest {
  std::string config_hash;
  std::map<std::string, std::string> versions;
  // Latest state per cell id.
  std::map<std::string, CellState> cells;
};

// Folds the event log; a missing file gives an empty manifest.
absl::StatusOr<Manifest> ReadManifest(const std::string& output_dir);

struct ExperimentHooks {
  // Called before a cell is computed. Aborted stops the whole experiment
  // (as if the process died); any other error fails just that cell.
  std::function<absl::Status(const CellKey&)> before_cell;
};

struct RunOptions {
  // Only cells whose id contains this substring run.
  std::string cell_filter;
  ExperimentHooks hooks;
};

struct ExperimentResult {
  std::vector<MetricsReport> reports;
  size_t computed = 0;
  size_t skipped = 0;
  size_t failed = 0;
  // Layouts that could not be rendered, with the reason.
  std::vector<std::string> table_errors;
};

// Cell ids of the grid, in execution order.
std::vector<CellKey> GridCells(const ExperimentConfig& config);

absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& config,
                                               const RunOptions& options = {});

struct ReplayResult {
  MetricsReport recomputed;
  MetricsReport stored;
  // ReportToJson(recomputed) rendered as stored on disk.
  std::string recomputed_json;
  bool identical = false;
  std::vector<std::string> warnings;
};

// Recomputes one done cell from its stored records, without model calls.
absl::StatusOr<ReplayResult> ReplayCell(const std::string& output_dir,
                                        const std::string& cell_id);

// Renders `layout` from every done cell's stored report and writes it under
// reports/.
absl::StatusOr<RenderedTable> WriteReportTable(const std::string& output_dir,
                                               ReportLayout layout);

}  // namespace ragaudit

#endif  // RAGAUDIT_EXPERIMENT_H_
