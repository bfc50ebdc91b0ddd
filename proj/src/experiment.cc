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

#include "ragaudit/experiment.h"

#include <filesystem>
#include <fstream>
#include <memory>
#include <optional>
#include <utility>

#include "absl/strings/match.h"
#include "absl/strings/str_cat.h"
#include "ragaudit/cassette.h"
#include "ragaudit/model.h"
#include "ragaudit/protocol.h"
#include "ragaudit/remote.h"
#include "ragaudit/retrieval.h"
#include "ragaudit/sim_generator.h"
#include "ragaudit/status_macros.h"
#include "ragaudit/util.h"

namespace ragaudit {
namespace {

namespace fs = std::filesystem;
using nlohmann::json;

constexpr char kManifestFile[] = "manifest.jsonl";
constexpr char kRecordsFile[] = "records.jsonl";
constexpr char kReportFile[] = "report.json";
constexpr char kAuditFile[] = "audit.jsonl";

const std::map<std::string, std::string>& Versions() {
  static const auto* versions = new std::map<std::string, std::string>{
      {"ragaudit", "0.1.0"},
      {"index_format", "1"},
      {"record_schema", "1"},
      {"report_schema", "1"}};
  return *versions;
}

absl::Status WriteFile(const fs::path& path, const std::string& content) {
  std::error_code ec;
  fs::create_directories(path.parent_path(), ec);
  if (ec) {
    return absl::InternalError(
        absl::StrCat("cannot create ", path.parent_path().string(), ": ",
                     ec.message()));
  }
  // Write-then-rename so an interrupted run never leaves a torn file.
  const fs::path tmp = path.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) return absl::InternalError(absl::StrCat("cannot write ", tmp.string()));
    out << content;
    if (!out) return absl::InternalError(absl::StrCat("cannot write ", tmp.string()));
  }
  fs::rename(tmp, path, ec);
  if (ec) {
    return absl::InternalError(
        absl::StrCat("cannot rename to ", path.string(), ": ", ec.message()));
  }
  return absl::OkStatus();
}

absl::Status AppendManifest(const std::string& dir, const json& event) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  std::ofstream out(fs::path(dir) / kManifestFile,
                    std::ios::binary | std::ios::app);
  if (!out) {
    return absl::InternalError(absl::StrCat("cannot append to manifest in ", dir));
  }
  out << event.dump() << '\n';
  out.flush();
  if (!out) return absl::InternalError("manifest write failed");
  return absl::OkStatus();
}

absl::StatusOr<CellStatus> ParseCellStatus(std::string_view name) {
  for (CellStatus s : {CellStatus::kPending, CellStatus::kRunning,
                       CellStatus::kDone, CellStatus::kFailed}) {
    if (name == CellStatusName(s)) return s;
  }
  return absl::DataLossError(
      absl::StrCat("unknown cell status \"", std::string(name), "\""));
}

// Everything built once per experiment and shared by the cells.
struct Backends {
  std::vector<Document> corpus;
  CorpusSplit split;
  std::unique_ptr<Embedder> embedder;
  std::optional<RetrievalIndex> index;
  std::unique_ptr<Generator> base_generator;
  std::unique_ptr<CassetteGenerator> cassette;
  Generator* generator = nullptr;
  std::string backend_label;
  std::map<int, RetrievalMatch> member_match;
  std::map<int, RetrievalMatch> non_member_match;
};

absl::StatusOr<std::unique_ptr<Backends>> BuildBackends(
    const ExperimentConfig& config) {
  auto b = std::make_unique<Backends>();
  if (config.corpus.path.empty()) {
    b->corpus = SynthesizeCorpus(config.corpus.synthetic);
  } else {
    RAGAUDIT_ASSIGN_OR_RETURN(
        b->corpus,
        LoadCorpus(config.corpus.path, config.corpus.format, config.corpus.kind));
  }
  const size_t members =
      config.split.member_count.value_or(b->corpus.size() * 8 / 10);
  RAGAUDIT_ASSIGN_OR_RETURN(b->split,
                            SplitMembers(b->corpus, members, config.split.seed));

  if (config.embedder.backend == "http") {
    HttpEmbedderOptions opts;
    opts.api_key = config.embedder.api_key;
    opts.retry.max_attempts = config.generator.max_attempts;
    RAGAUDIT_ASSIGN_OR_RETURN(
        b->embedder,
        HttpEmbedder::Connect(
            MakeHttpTransport(config.embedder.endpoint,
                              std::chrono::milliseconds(config.embedder.timeout_ms)),
            opts));
  } else {
    b->embedder = std::make_unique<SimEmbedder>(config.embedder.dimension);
  }
  RAGAUDIT_ASSIGN_OR_RETURN(
      RetrievalIndex index,
      RetrievalIndex::Build(b->split.members, *b->embedder,
                            config.retrieval.build));
  b->index = std::move(index);

  const GeneratorConfig& g = config.generator;
  if (g.backend == "sim") {
    auto sim = std::make_unique<SimGenerator>(g.sim);
    for (const auto& [kind, path] : config.template_files) {
      RAGAUDIT_ASSIGN_OR_RETURN(RagTemplate t, LoadTemplate(path, kind));
      sim->AddTemplate(t);
    }
    b->base_generator = std::move(sim);
    b->generator = b->base_generator.get();
  } else if (g.backend == "http") {
    HttpGeneratorOptions opts;
    opts.name = g.name.empty() ? "http" : g.name;
    opts.path = g.path;
    opts.protocol = g.protocol == "openai" ? WireProtocol::kOpenAiCompletions
                                           : WireProtocol::kNeutral;
    opts.model = g.model;
    opts.api_key = g.api_key;
    opts.supports_logprobs = g.supports_logprobs;
    opts.max_in_flight = g.max_in_flight;
    opts.retry.max_attempts = g.max_attempts;
    b->base_generator = std::make_unique<HttpGenerator>(
        MakeHttpTransport(g.endpoint, std::chrono::milliseconds(g.timeout_ms)),
        opts);
    b->generator = b->base_generator.get();
    if (!g.cassette.empty()) {
      RAGAUDIT_ASSIGN_OR_RETURN(
          b->cassette,
          CassetteGenerator::Open(g.cassette, CassetteMode::kRecord,
                                  b->generator, g.supports_logprobs));
      b->generator = b->cassette.get();
    }
  } else {
    RAGAUDIT_ASSIGN_OR_RETURN(
        b->cassette, CassetteGenerator::Open(g.cassette, CassetteMode::kReplay,
                                             nullptr, g.supports_logprobs));
    b->generator = b->cassette.get();
  }
  b->backend_label = g.name.empty() ? g.backend : g.name;
  return b;
}

// Retrieval match rates over the evaluation pools, computed once per format.
absl::Status ComputeRetrievalMatch(const ExperimentConfig& config, int format_id,
                                   Backends& b) {
  if (b.member_match.count(format_id)) return absl::OkStatus();
  RAGAUDIT_ASSIGN_OR_RETURN(EvalPools pools,
                            DrawPools(b.split, config.protocol));
  auto samples_of = [&](const std::vector<const Document*>& docs)
      -> absl::StatusOr<std::vector<TargetSample>> {
    std::vector<TargetSample> out;
    for (const Document* d : docs) {
      RAGAUDIT_ASSIGN_OR_RETURN(TargetSample s,
                                ExtractTargetSample(*d, config.corpus.target));
      out.push_back(std::move(s));
    }
    return out;
  };
  auto builder = [format_id](const TargetSample& s) {
    auto p = BuildAttackPrompt(s, format_id);
    return p.ok() ? *p : s.text;
  };
  const size_t k = std::min(config.retrieval.k, b.index->size());
  RAGAUDIT_ASSIGN_OR_RETURN(auto member_samples, samples_of(pools.members));
  RAGAUDIT_ASSIGN_OR_RETURN(auto non_member_samples,
                            samples_of(pools.non_members));
  RAGAUDIT_ASSIGN_OR_RETURN(
      b.member_match[format_id],
      RetrievalMatchRate(*b.index, member_samples, builder, *b.embedder, k));
  RAGAUDIT_ASSIGN_OR_RETURN(
      b.non_member_match[format_id],
      RetrievalMatchRate(*b.index, non_member_samples, builder, *b.embedder, k));
  return absl::OkStatus();
}

std::string JsonLines(const std::vector<json>& items) {
  std::string out;
  for (const json& j : items) absl::StrAppend(&out, j.dump(), "\n");
  return out;
}

absl::StatusOr<RagTemplate> TemplateFor(const ExperimentConfig& config,
                                        TemplateKind kind) {
  auto it = config.template_files.find(kind);
  if (it != config.template_files.end()) return LoadTemplate(it->second, kind);
  return BuiltinTemplate(kind);
}

// Runs one cell and writes its files. Returns the stored report.
absl::StatusOr<MetricsReport> RunCell(const ExperimentConfig& config,
                                      const CellKey& cell, TemplateKind kind,
                                      Mode mode, const std::string& config_hash,
                                      Backends& b,
                                      std::map<std::string, std::string>& files) {
  RagSystem system;
  system.index = &*b.index;
  system.embedder = b.embedder.get();
  system.generator = b.generator;
  RAGAUDIT_ASSIGN_OR_RETURN(system.rag_template, TemplateFor(config, kind));
  system.k = std::min(config.retrieval.k, b.index->size());

  RagAttackOptions attack;
  attack.format_id = cell.prompt_id;
  attack.graybox = mode == Mode::kGraybox;
  attack.seed = config.seed;
  attack.max_tokens = config.generator.max_tokens;
  attack.target = config.corpus.target;
  attack.features = config.attack.features;
  attack.audit = config.audit_log;
  RAGAUDIT_ASSIGN_OR_RETURN(AttackFn fn, MakeRagAttack(system, attack));

  ProtocolConfig protocol = config.protocol;
  protocol.graybox = attack.graybox;
  protocol.ensemble.size = config.attack.ensemble_size;
  protocol.ensemble.seed = config.attack.ensemble_seed;
  protocol.ensemble.feature_mask = config.attack.feature_mask;
  protocol.ensemble.threads = protocol.threads;
  RAGAUDIT_ASSIGN_OR_RETURN(ProtocolResult result,
                            RunProtocol(fn, b.split, protocol));
  RAGAUDIT_RETURN_IF_ERROR(ComputeRetrievalMatch(config, cell.prompt_id, b));

  MetricsReport report = std::move(result.report);
  report.cell = cell;
  report.config_hash = config_hash;
  report.simulated = b.generator->IsSimulated() &&
                     config.embedder.backend == "sim";
  report.retrieval_match_member_percent =
      b.member_match[cell.prompt_id].equal_percent;
  report.retrieval_match_non_member_percent =
      b.non_member_match[cell.prompt_id].equal_percent;

  const fs::path dir = fs::path(config.output_dir) / "cells" / cell.Id();
  std::vector<json> records;
  for (const MembershipRecord& r : result.records) records.push_back(RecordToJson(r));
  const std::string records_text = JsonLines(records);
  const std::string report_text = ReportToJson(report).dump(2) + "\n";
  RAGAUDIT_RETURN_IF_ERROR(WriteFile(dir / kRecordsFile, records_text));
  files[kRecordsFile] = Hex64(Fnv1a64(records_text));
  if (config.audit_log) {
    std::string audit;
    for (const std::string& line : result.audit_lines) {
      absl::StrAppend(&audit, line, "\n");
    }
    RAGAUDIT_RETURN_IF_ERROR(WriteFile(dir / kAuditFile, audit));
    files[kAuditFile] = Hex64(Fnv1a64(audit));
  }
  RAGAUDIT_RETURN_IF_ERROR(WriteFile(dir / kReportFile, report_text));
  files[kReportFile] = Hex64(Fnv1a64(report_text));
  return report;
}

json CellEvent(const CellKey& cell, CellStatus status,
               const std::string& config_hash) {
  return {{"event", "cell"},
          {"cell", cell.Id()},
          {"status", std::string(CellStatusName(status))},
          {"config_hash", config_hash}};
}

absl::StatusOr<MetricsReport> LoadStoredReport(const fs::path& path) {
  std::string text;
  if (!ReadFileToString(path.string(), &text)) {
    return absl::NotFoundError(absl::StrCat("cannot read ", path.string()));
  }
  json j = json::parse(text, nullptr, /*allow_exceptions=*/false);
  if (j.is_discarded()) {
    return absl::DataLossError(absl::StrCat(path.string(), " is not JSON"));
  }
  return ReportFromJson(j);
}

}  // namespace

std::string_view CellStatusName(CellStatus status) {
  switch (status) {
    case CellStatus::kPending:
      return "pending";
    case CellStatus::kRunning:
      return "running";
    case CellStatus::kDone:
      return "done";
    case CellStatus::kFailed:
      return "failed";
  }
  return "unknown";
}

absl::StatusOr<Manifest> ReadManifest(const std::string& output_dir) {
  Manifest m;
  std::string text;
  if (!ReadFileToString((fs::path(output_dir) / kManifestFile).string(), &text)) {
    return m;
  }
  size_t line_no = 0;
  for (std::string_view line : SplitString(text, '\n')) {
    ++line_no;
    if (TrimWhitespace(line).empty()) continue;
    json e = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (e.is_discarded()) {
      // A torn final line from an interrupted append is ignored.
      continue;
    }
    try {
      const std::string kind = e.at("event").get<std::string>();
      if (kind == "start") {
        m.config_hash = e.at("config_hash").get<std::string>();
        m.versions = e.at("versions").get<std::map<std::string, std::string>>();
      } else if (kind == "cell") {
        CellState& s = m.cells[e.at("cell").get<std::string>()];
        auto status = ParseCellStatus(e.at("status").get<std::string>());
        if (!status.ok()) return status.status();
        s.status = *status;
        s.config_hash = e.at("config_hash").get<std::string>();
        s.error = e.value("error", "");
        s.files.clear();
        if (e.contains("files")) {
          s.files = e["files"].get<std::map<std::string, std::string>>();
        }
      }
    } catch (const json::exception& ex) {
      return absl::DataLossError(
          absl::StrCat("manifest line ", line_no, ": ", ex.what()));
    }
  }
  return m;
}

std::vector<CellKey> GridCells(const ExperimentConfig& config) {
  std::vector<CellKey> cells;
  const std::string backend =
      config.generator.name.empty() ? config.generator.backend
                                    : config.generator.name;
  for (TemplateKind kind : config.templates) {
    for (int format : config.attack.format_ids) {
      for (Mode mode : config.attack.modes) {
        CellKey key;
        key.dataset = config.corpus.dataset;
        key.backend = backend;
        key.prompt_id = format;
        key.template_kind = std::string(TemplateKindName(kind));
        key.mode = std::string(ModeName(mode));
        cells.push_back(std::move(key));
      }
    }
  }
  return cells;
}

absl::StatusOr<ExperimentResult> RunExperiment(const ExperimentConfig& config,
                                               const RunOptions& options) {
  const std::string hash = ConfigHash(config);
  RAGAUDIT_ASSIGN_OR_RETURN(Manifest manifest, ReadManifest(config.output_dir));
  RAGAUDIT_RETURN_IF_ERROR(AppendManifest(
      config.output_dir,
      {{"event", "start"}, {"config_hash", hash}, {"versions", Versions()}}));
  RAGAUDIT_RETURN_IF_ERROR(
      WriteFile(fs::path(config.output_dir) / "config.json",
                ConfigToJson(config).dump(2) + "\n"));

  ExperimentResult result;
  std::unique_ptr<Backends> backends;
  for (const CellKey& cell : GridCells(config)) {
    if (!options.cell_filter.empty() &&
        !absl::StrContains(cell.Id(), options.cell_filter)) {
      continue;
    }
    const fs::path report_path =
        fs::path(config.output_dir) / "cells" / cell.Id() / kReportFile;
    auto prior = manifest.cells.find(cell.Id());
    if (prior != manifest.cells.end() &&
        prior->second.status == CellStatus::kDone &&
        prior->second.config_hash == hash) {
      auto stored = LoadStoredReport(report_path);
      if (stored.ok()) {
        result.reports.push_back(*std::move(stored));
        ++result.skipped;
        continue;
      }
    }
    if (options.hooks.before_cell) {
      absl::Status s = options.hooks.before_cell(cell);
      if (absl::IsAborted(s)) return s;
      if (!s.ok()) {
        json e = CellEvent(cell, CellStatus::kFailed, hash);
        e["error"] = std::string(s.message());
        RAGAUDIT_RETURN_IF_ERROR(AppendManifest(config.output_dir, e));
        ++result.failed;
        continue;
      }
    }
    if (backends == nullptr) {
      RAGAUDIT_ASSIGN_OR_RETURN(backends, BuildBackends(config));
    }
    RAGAUDIT_RETURN_IF_ERROR(AppendManifest(
        config.output_dir, CellEvent(cell, CellStatus::kRunning, hash)));
    auto kind = ParseTemplateKind(cell.template_kind);
    auto mode = ParseMode(cell.mode);
    std::map<std::string, std::string> files;
    absl::StatusOr<MetricsReport> report =
        kind.ok() && mode.ok()
            ? RunCell(config, cell, *kind, *mode, hash, *backends, files)
            : absl::StatusOr<MetricsReport>(absl::InternalError("bad cell key"));
    if (!report.ok()) {
      json e = CellEvent(cell, CellStatus::kFailed, hash);
      e["error"] = std::string(report.status().message());
      RAGAUDIT_RETURN_IF_ERROR(AppendManifest(config.output_dir, e));
      ++result.failed;
      continue;
    }
    json e = CellEvent(cell, CellStatus::kDone, hash);
    e["files"] = files;
    RAGAUDIT_RETURN_IF_ERROR(AppendManifest(config.output_dir, e));
    result.reports.push_back(*std::move(report));
    ++result.computed;
  }

  for (ReportLayout layout : {ReportLayout::kSummaryTable,
                              ReportLayout::kFullTable,
                              ReportLayout::kDefenseTable}) {
    auto table = WriteReportTable(config.output_dir, layout);
    if (!table.ok()) {
      result.table_errors.push_back(absl::StrCat(
          std::string(ReportLayoutName(layout)), ": ", table.status().message()));
    }
  }
  return result;
}

absl::StatusOr<ReplayResult> ReplayCell(const std::string& output_dir,
                                        const std::string& cell_id) {
  RAGAUDIT_ASSIGN_OR_RETURN(Manifest manifest, ReadManifest(output_dir));
  auto it = manifest.cells.find(cell_id);
  if (it == manifest.cells.end()) {
    return absl::NotFoundError(absl::StrCat("cell ", cell_id, " is not in the manifest"));
  }
  if (it->second.status != CellStatus::kDone) {
    return absl::FailedPreconditionError(absl::StrCat(
        "cell ", cell_id, " is ", std::string(CellStatusName(it->second.status)),
        ", not done"));
  }
  const fs::path dir = fs::path(output_dir) / "cells" / cell_id;
  std::string records_text;
  if (!ReadFileToString((dir / kRecordsFile).string(), &records_text)) {
    return absl::NotFoundError(
        absl::StrCat("missing records for cell ", cell_id));
  }
  std::vector<MembershipRecord> records;
  size_t line_no = 0;
  for (std::string_view line : SplitString(records_text, '\n')) {
    ++line_no;
    if (TrimWhitespace(line).empty()) continue;
    json j = json::parse(line, nullptr, /*allow_exceptions=*/false);
    if (j.is_discarded()) {
      return absl::DataLossError(
          absl::StrCat("records line ", line_no, " is not JSON"));
    }
    RAGAUDIT_ASSIGN_OR_RETURN(MembershipRecord r, RecordFromJson(j));
    records.push_back(std::move(r));
  }
  ReplayResult out;
  RAGAUDIT_ASSIGN_OR_RETURN(out.stored, LoadStoredReport(dir / kReportFile));
  RAGAUDIT_ASSIGN_OR_RETURN(out.recomputed,
                            MetricsFromRecords(records, out.stored));
  out.recomputed_json = ReportToJson(out.recomputed).dump(2) + "\n";
  std::string stored_text;
  ReadFileToString((dir / kReportFile).string(), &stored_text);
  out.identical = stored_text == out.recomputed_json;

  auto expect = it->second.files.find(kRecordsFile);
  const std::string actual = Hex64(Fnv1a64(records_text));
  if (expect == it->second.files.end() || expect->second != actual) {
    out.warnings.push_back(absl::StrCat(
        "records.jsonl does not match the hash recorded in the manifest for "
        "config ",
        it->second.config_hash, "; the records were modified after the run"));
  }
  if (out.stored.config_hash != it->second.config_hash) {
    out.warnings.push_back(absl::StrCat(
        "report config hash ", out.stored.config_hash,
        " differs from the manifest's ", it->second.config_hash));
  }
  if (!out.identical) {
    out.warnings.push_back("recomputed report differs from the stored report");
  }
  return out;
}

absl::StatusOr<RenderedTable> WriteReportTable(const std::string& output_dir,
                                               ReportLayout layout) {
  RAGAUDIT_ASSIGN_OR_RETURN(Manifest manifest, ReadManifest(output_dir));
  std::vector<MetricsReport> reports;
  uint64_t seed = 0;
  for (const auto& [id, state] : manifest.cells) {
    if (state.status != CellStatus::kDone) continue;
    if (!manifest.config_hash.empty() && state.config_hash != manifest.config_hash) {
      continue;
    }
    RAGAUDIT_ASSIGN_OR_RETURN(
        MetricsReport r,
        LoadStoredReport(fs::path(output_dir) / "cells" / id / kReportFile));
    seed = r.seed;
    reports.push_back(std::move(r));
  }
  RAGAUDIT_ASSIGN_OR_RETURN(
      RenderedTable table,
      RenderReportTable(reports, layout, seed, manifest.config_hash));
  const fs::path dir = fs::path(output_dir) / "reports";
  const std::string name(ReportLayoutName(layout));
  RAGAUDIT_RETURN_IF_ERROR(WriteFile(dir / (name + ".csv"), table.csv));
  RAGAUDIT_RETURN_IF_ERROR(WriteFile(dir / (name + ".json"), table.json));
  return table;
}

}  // namespace ragaudit
