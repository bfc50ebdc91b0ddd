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

// ragaudit: membership-inference audits of RAG systems.
//
//   ragaudit validate --config exp.yaml
//   ragaudit run      --config exp.yaml [--output DIR] [--seed N] [--cell SUBSTR]
//   ragaudit replay   --output DIR --cell CELL_ID
//   ragaudit report   --output DIR [--layout summary_table|full_table|defense_table]
//   ragaudit synth    --count N --kind email --seed N --out corpus.jsonl
//
// Exit codes: 0 success, 1 validation failure, 2 partial cell failure,
// 3 I/O failure.

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include "CLI11.hpp"
#include "absl/status/status.h"
#include "ragaudit/config.h"
#include "ragaudit/experiment.h"
#include "ragaudit/report.h"
#include "ragaudit/synthetic_corpus.h"

namespace {

constexpr int kOk = 0;
constexpr int kValidationFailure = 1;
constexpr int kPartialFailure = 2;
constexpr int kIoFailure = 3;

int ExitCodeFor(const absl::Status& status) {
  switch (status.code()) {
    case absl::StatusCode::kOk:
      return kOk;
    case absl::StatusCode::kInvalidArgument:
    case absl::StatusCode::kFailedPrecondition:
    case absl::StatusCode::kOutOfRange:
      return kValidationFailure;
    default:
      return kIoFailure;
  }
}

int Fail(const absl::Status& status) {
  std::cerr << "error: " << status.message() << "\n";
  return ExitCodeFor(status);
}

absl::StatusOr<ragaudit::ExperimentConfig> Load(
    const std::string& path, std::optional<uint64_t> seed,
    const std::string& output) {
  auto config = ragaudit::LoadConfig(path, seed);
  if (!config.ok()) return config;
  if (!output.empty()) config->output_dir = output;
  return config;
}

int Validate(const std::string& path, std::optional<uint64_t> seed) {
  auto config = Load(path, seed, "");
  if (!config.ok()) {
    // LoadConfig puts one error per line.
    std::cerr << config.status().message() << "\n";
    return config.status().code() == absl::StatusCode::kNotFound
               ? kIoFailure
               : kValidationFailure;
  }
  std::cout << "ok config_hash=" << ragaudit::ConfigHash(*config) << "\n";
  return kOk;
}

int Run(const std::string& path, std::optional<uint64_t> seed,
        const std::string& output, const std::string& cell) {
  auto config = Load(path, seed, output);
  if (!config.ok()) {
    std::cerr << config.status().message() << "\n";
    return config.status().code() == absl::StatusCode::kNotFound
               ? kIoFailure
               : kValidationFailure;
  }
  ragaudit::RunOptions options;
  options.cell_filter = cell;
  auto result = ragaudit::RunExperiment(*config, options);
  if (!result.ok()) return Fail(result.status());
  std::cout << "cells computed=" << result->computed
            << " skipped=" << result->skipped << " failed=" << result->failed
            << "\n";
  for (const std::string& e : result->table_errors) {
    std::cout << "table not written: " << e << "\n";
  }
  auto manifest = ragaudit::ReadManifest(config->output_dir);
  if (manifest.ok()) {
    for (const auto& [id, state] : manifest->cells) {
      if (state.status == ragaudit::CellStatus::kFailed) {
        std::cerr << "failed " << id << ": " << state.error << "\n";
      }
    }
  }
  return result->failed > 0 ? kPartialFailure : kOk;
}

int Replay(const std::string& output, const std::string& cell) {
  auto result = ragaudit::ReplayCell(output, cell);
  if (!result.ok()) return Fail(result.status());
  std::cout << result->recomputed_json;
  for (const std::string& w : result->warnings) {
    std::cerr << "warning: " << w << "\n";
  }
  return result->identical && result->warnings.empty() ? kOk : kPartialFailure;
}

int Report(const std::string& output, const std::string& layout_name) {
  auto layout = ragaudit::ParseReportLayout(layout_name);
  if (!layout.ok()) return Fail(layout.status());
  auto table = ragaudit::WriteReportTable(output, *layout);
  if (!table.ok()) {
    std::cerr << "error: " << table.status().message() << "\n";
    return table.status().code() == absl::StatusCode::kFailedPrecondition
               ? kPartialFailure
               : ExitCodeFor(table.status());
  }
  std::cout << table->csv;
  return kOk;
}

int Synth(size_t count, const std::string& kind_name, uint64_t seed,
          const std::string& out) {
  auto kind = ragaudit::ParseDatasetKind(kind_name);
  if (!kind.ok()) return Fail(kind.status());
  ragaudit::SyntheticCorpusOptions options;
  options.count = count;
  options.kind = *kind;
  options.seed = seed;
  const std::string jsonl =
      ragaudit::DocumentsToJsonl(ragaudit::SynthesizeCorpus(options));
  if (out.empty() || out == "-") {
    std::cout << jsonl;
    return kOk;
  }
  std::ofstream file(out, std::ios::binary | std::ios::trunc);
  file << jsonl;
  if (!file) {
    std::cerr << "error: cannot write " << out << "\n";
    return kIoFailure;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Membership-inference audits of retrieval-augmented generation"};
  app.require_subcommand(1);

  std::string config_path;
  std::string output;
  std::string cell;
  std::optional<uint64_t> seed;

  CLI::App* validate = app.add_subcommand("validate", "Check a config file");
  validate->add_option("-c,--config", config_path, "Config file")->required();
  validate->add_option("--seed", seed, "Override the top-level seed");

  CLI::App* run = app.add_subcommand("run", "Run the experiment grid");
  run->add_option("-c,--config", config_path, "Config file")->required();
  run->add_option("-o,--output", output, "Output directory");
  run->add_option("--seed", seed, "Override the top-level seed");
  run->add_option("--cell", cell, "Only run cells whose id contains this");

  CLI::App* replay =
      app.add_subcommand("replay", "Recompute a cell from its stored records");
  replay->add_option("-o,--output", output, "Output directory")->required();
  replay->add_option("--cell", cell, "Cell id")->required();

  std::string layout = "summary_table";
  CLI::App* report = app.add_subcommand("report", "Render a result table");
  report->add_option("-o,--output", output, "Output directory")->required();
  report->add_option("--layout", layout,
                     "summary_table, full_table or defense_table");

  size_t count = 1000;
  std::string kind = "email";
  uint64_t synth_seed = 0;
  std::string out;
  CLI::App* synth = app.add_subcommand("synth", "Write a synthetic corpus");
  synth->add_option("--count", count, "Number of documents");
  synth->add_option("--kind", kind, "email, qa_dialogue or generic");
  synth->add_option("--seed", synth_seed, "Generator seed");
  synth->add_option("--out", out, "Output JSONL file, - for stdout");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidationFailure;
  }

  if (validate->parsed()) return Validate(config_path, seed);
  if (run->parsed()) return Run(config_path, seed, output, cell);
  if (replay->parsed()) return Replay(output, cell);
  if (report->parsed()) return Report(output, layout);
  if (synth->parsed()) return Synth(count, kind, synth_seed, out);
  return kValidationFailure;
}
