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

#include "ragaudit/report.h"

#include <algorithm>
#include <map>
#include <tuple>
#include <utility>

#include "absl/strings/ascii.h"
#include "absl/strings/match.h"
#include "absl/strings/str_cat.h"
#include "absl/strings/str_format.h"
#include "absl/strings/str_join.h"

namespace ragaudit {
namespace {

using nlohmann::json;

json OptionalToJson(const std::optional<double>& v) {
  return v ? json(*v) : json(nullptr);
}

std::optional<double> OptionalFromJson(const json& j, const char* key) {
  auto it = j.find(key);
  if (it == j.end() || it->is_null()) return std::nullopt;
  return it->get<double>();
}

json MissingToJson(const MissingStats& m) {
  return {{"missing", m.missing}, {"total", m.total}, {"percent", m.percent}};
}

MissingStats MissingFromJson(const json& j) {
  MissingStats m;
  m.missing = j.at("missing").get<size_t>();
  m.total = j.at("total").get<size_t>();
  m.percent = j.at("percent").get<double>();
  return m;
}

// Published results (dataset, model, prompt, BB TPR, BB FPR, GB TPR@lowFPR,
// BB AUC, GB AUC). prompt -1 rows are the per-model best-prompt summary.
struct RefRow {
  const char* dataset;
  const char* model;
  int prompt;
  double bb_tpr, bb_fpr, gb_tpr, bb_auc, gb_auc;
};

constexpr RefRow kPublished[] = {
    {"HealthCareMagic", "flan", -1, 1.00, 0.61, 0.85, 0.81, 0.99},
    {"HealthCareMagic", "llama", -1, 0.95, 0.20, 0.73, 0.89, 0.96},
    {"HealthCareMagic", "mistral", -1, 0.42, 0.10, 0.36, 0.74, 0.83},
    {"Enron", "flan", -1, 1.00, 0.56, 0.63, 0.82, 0.96},
    {"Enron", "llama", -1, 0.78, 0.30, 0.28, 0.79, 0.83},
    {"Enron", "mistral", -1, 0.61, 0.17, 0.22, 0.78, 0.81},
    {"HealthCareMagic", "flan", 0, 1.00, 0.63, 0.76, 0.80, 0.97},
    {"HealthCareMagic", "flan", 1, 0.99, 0.84, 0.76, 0.75, 0.97},
    {"HealthCareMagic", "flan", 2, 1.00, 0.74, 0.83, 0.78, 0.99},
    {"HealthCareMagic", "flan", 3, 0.98, 0.70, 0.33, 0.76, 0.83},
    {"HealthCareMagic", "flan", 4, 1.00, 0.61, 0.85, 0.81, 0.99},
    {"HealthCareMagic", "llama", 0, 0.91, 0.29, 0.48, 0.82, 0.87},
    {"HealthCareMagic", "llama", 1, 0.64, 0.30, 0.28, 0.67, 0.63},
    {"HealthCareMagic", "llama", 2, 0.95, 0.20, 0.73, 0.89, 0.96},
    {"HealthCareMagic", "llama", 3, 0.92, 0.44, 0.47, 0.77, 0.82},
    {"HealthCareMagic", "llama", 4, 0.91, 0.25, 0.38, 0.84, 0.88},
    {"HealthCareMagic", "mistral", 0, 0.91, 0.63, 0.32, 0.70, 0.72},
    {"HealthCareMagic", "mistral", 1, 0.83, 0.54, 0.27, 0.67, 0.65},
    {"HealthCareMagic", "mistral", 2, 0.97, 0.69, 0.36, 0.74, 0.83},
    {"HealthCareMagic", "mistral", 3, 0.94, 0.71, 0.22, 0.70, 0.73},
    {"HealthCareMagic", "mistral", 4, 0.42, 0.10, 0.23, 0.71, 0.54},
    {"Enron", "flan", 0, 0.99, 0.65, 0.60, 0.79, 0.93},
    {"Enron", "flan", 1, 0.94, 0.75, 0.46, 0.68, 0.81},
    {"Enron", "flan", 2, 1.00, 0.56, 0.63, 0.82, 0.96},
    {"Enron", "flan", 3, 0.87, 0.73, 0.27, 0.60, 0.63},
    {"Enron", "flan", 4, 1.00, 0.63, 0.34, 0.81, 0.91},
    {"Enron", "llama", 0, 0.92, 0.63, 0.13, 0.71, 0.66},
    {"Enron", "llama", 1, 0.63, 0.38, 0.14, 0.62, 0.54},
    {"Enron", "llama", 2, 0.91, 0.38, 0.28, 0.79, 0.83},
    {"Enron", "llama", 3, 0.93, 0.72, 0.14, 0.69, 0.59},
    {"Enron", "llama", 4, 0.78, 0.30, 0.17, 0.74, 0.75},
    {"Enron", "mistral", 0, 0.87, 0.64, 0.09, 0.66, 0.59},
    {"Enron", "mistral", 1, 0.85, 0.50, 0.21, 0.70, 0.68},
    {"Enron", "mistral", 2, 0.92, 0.44, 0.22, 0.78, 0.81},
    {"Enron", "mistral", 3, 0.86, 0.65, 0.10, 0.64, 0.51},
    {"Enron", "mistral", 4, 0.61, 0.17, 0.20, 0.73, 0.67},
};

std::string Num(double v) { return absl::StrFormat("%.4f", v); }

std::string CsvField(const std::string& s) {
  if (s.find_first_of(",\"\n") == std::string::npos) return s;
  std::string out = "\"";
  for (char c : s) {
    if (c == '"') out += '"';
    out += c;
  }
  out += '"';
  return out;
}

// The metric columns shared by every layout.
constexpr const char* kMetricColumns[] = {"bb_tpr", "bb_fpr", "gb_tpr_at_low_fpr",
                                          "bb_auc", "gb_auc"};

// Appends the five metric values of `r`, or records why it cannot.
void AppendMetrics(const MetricsReport& r, std::vector<std::string>& cells,
                   json& row, const std::string& prefix,
                   std::vector<std::string>& missing) {
  auto put = [&](const char* col, std::optional<double> v) {
    if (!v) {
      missing.push_back(absl::StrCat(r.cell.Id(), ": ", col));
      cells.push_back("");
      row[prefix + col] = nullptr;
      return;
    }
    cells.push_back(Num(*v));
    row[prefix + col] = *v;
  };
  put(kMetricColumns[0], r.blackbox_tpr);
  put(kMetricColumns[1], r.blackbox_fpr);
  put(kMetricColumns[2], r.graybox_tpr_at_fpr0);
  put(kMetricColumns[3], r.blackbox_auc);
  put(kMetricColumns[4], r.graybox_auc);
}

void AppendReference(const MetricsReport& r, int prompt_id, json& row,
                     std::vector<std::string>& cells) {
  if (r.simulated) {
    row["published_reference"] = nullptr;
    cells.push_back("");
    return;
  }
  auto ref = FindPublishedReference(r.cell.dataset, r.cell.backend, prompt_id);
  if (!ref) {
    row["published_reference"] = "none";
    cells.push_back("none");
    return;
  }
  row["published_reference"] = {
      {"dataset", ref->dataset},
      {"model", ref->model},
      {"bb_tpr", ref->blackbox_tpr},
      {"bb_fpr", ref->blackbox_fpr},
      {"gb_tpr_at_low_fpr", ref->graybox_tpr_at_low_fpr},
      {"bb_auc", ref->blackbox_auc},
      {"gb_auc", ref->graybox_auc}};
  cells.push_back(absl::StrFormat(
      "%s/%s bb_tpr=%.2f bb_fpr=%.2f gb_tpr_at_low_fpr=%.2f bb_auc=%.2f "
      "gb_auc=%.2f",
      ref->dataset, ref->model, ref->blackbox_tpr, ref->blackbox_fpr,
      ref->graybox_tpr_at_low_fpr, ref->blackbox_auc, ref->graybox_auc));
}

bool IsDefended(const std::string& template_kind) {
  return template_kind != "plain";
}

}  // namespace

std::string CellKey::Id() const {
  return absl::StrCat(dataset, "__", backend, "__p", prompt_id, "__",
                      template_kind, "__", mode);
}

void AverageRuns(MetricsReport& report) {
  const double n = static_cast<double>(report.runs.size());
  if (report.runs.empty()) return;
  double tpr = 0, fpr = 0, auc = 0, gauc = 0, gtpr = 0;
  bool graybox = true;
  for (const RunMetrics& r : report.runs) {
    tpr += r.blackbox_tpr;
    fpr += r.blackbox_fpr;
    auc += r.blackbox_auc;
    if (r.graybox_auc && r.graybox_tpr_at_fpr0) {
      gauc += *r.graybox_auc;
      gtpr += *r.graybox_tpr_at_fpr0;
    } else {
      graybox = false;
    }
  }
  report.blackbox_tpr = tpr / n;
  report.blackbox_fpr = fpr / n;
  report.blackbox_auc = auc / n;
  if (graybox) {
    report.graybox_auc = gauc / n;
    report.graybox_tpr_at_fpr0 = gtpr / n;
  } else {
    report.graybox_auc.reset();
    report.graybox_tpr_at_fpr0.reset();
  }
}

json ReportToJson(const MetricsReport& r) {
  json runs = json::array();
  for (const RunMetrics& m : r.runs) {
    runs.push_back({{"run", m.run},
                    {"blackbox_tpr", m.blackbox_tpr},
                    {"blackbox_fpr", m.blackbox_fpr},
                    {"blackbox_auc", m.blackbox_auc},
                    {"graybox_auc", OptionalToJson(m.graybox_auc)},
                    {"graybox_tpr_at_fpr0",
                     OptionalToJson(m.graybox_tpr_at_fpr0)},
                    {"missing", MissingToJson(m.missing)}});
  }
  json j;
  j["cell"] = {{"id", r.cell.Id()},
               {"dataset", r.cell.dataset},
               {"backend", r.cell.backend},
               {"prompt_id", r.cell.prompt_id},
               {"template_kind", r.cell.template_kind},
               {"mode", r.cell.mode}};
  j["seed"] = r.seed;
  j["config_hash"] = r.config_hash;
  j["simulated"] = r.simulated;
  j["runs"] = std::move(runs);
  j["blackbox_tpr"] = r.blackbox_tpr;
  j["blackbox_fpr"] = r.blackbox_fpr;
  j["blackbox_auc"] = r.blackbox_auc;
  j["graybox_auc"] = OptionalToJson(r.graybox_auc);
  j["graybox_tpr_at_fpr0"] = OptionalToJson(r.graybox_tpr_at_fpr0);
  j["missing"] = MissingToJson(r.missing);
  j["retrieval_match_member_percent"] =
      OptionalToJson(r.retrieval_match_member_percent);
  j["retrieval_match_non_member_percent"] =
      OptionalToJson(r.retrieval_match_non_member_percent);
  j["attack_calls"] = r.attack_calls;
  // With a single operating point the tie-aware AUC equals
  // (TPR + 1 - FPR) / 2.
  j["blackbox_auc_note"] = "AUC of binary predictions = (TPR + 1 - FPR) / 2";
  return j;
}

absl::StatusOr<MetricsReport> ReportFromJson(const json& j) {
  MetricsReport r;
  try {
    const json& cell = j.at("cell");
    r.cell.dataset = cell.at("dataset").get<std::string>();
    r.cell.backend = cell.at("backend").get<std::string>();
    r.cell.prompt_id = cell.at("prompt_id").get<int>();
    r.cell.template_kind = cell.at("template_kind").get<std::string>();
    r.cell.mode = cell.at("mode").get<std::string>();
    r.seed = j.at("seed").get<uint64_t>();
    r.config_hash = j.at("config_hash").get<std::string>();
    r.simulated = j.at("simulated").get<bool>();
    for (const json& m : j.at("runs")) {
      RunMetrics rm;
      rm.run = m.at("run").get<int>();
      rm.blackbox_tpr = m.at("blackbox_tpr").get<double>();
      rm.blackbox_fpr = m.at("blackbox_fpr").get<double>();
      rm.blackbox_auc = m.at("blackbox_auc").get<double>();
      rm.graybox_auc = OptionalFromJson(m, "graybox_auc");
      rm.graybox_tpr_at_fpr0 = OptionalFromJson(m, "graybox_tpr_at_fpr0");
      rm.missing = MissingFromJson(m.at("missing"));
      r.runs.push_back(rm);
    }
    r.blackbox_tpr = j.at("blackbox_tpr").get<double>();
    r.blackbox_fpr = j.at("blackbox_fpr").get<double>();
    r.blackbox_auc = j.at("blackbox_auc").get<double>();
    r.graybox_auc = OptionalFromJson(j, "graybox_auc");
    r.graybox_tpr_at_fpr0 = OptionalFromJson(j, "graybox_tpr_at_fpr0");
    r.missing = MissingFromJson(j.at("missing"));
    r.retrieval_match_member_percent =
        OptionalFromJson(j, "retrieval_match_member_percent");
    r.retrieval_match_non_member_percent =
        OptionalFromJson(j, "retrieval_match_non_member_percent");
    r.attack_calls = j.at("attack_calls").get<size_t>();
  } catch (const json::exception& e) {
    return absl::DataLossError(absl::StrCat("malformed report: ", e.what()));
  }
  return r;
}

std::string_view ReportLayoutName(ReportLayout layout) {
  switch (layout) {
    case ReportLayout::kSummaryTable:
      return "summary_table";
    case ReportLayout::kFullTable:
      return "full_table";
    case ReportLayout::kDefenseTable:
      return "defense_table";
  }
  return "unknown";
}

absl::StatusOr<ReportLayout> ParseReportLayout(std::string_view name) {
  for (ReportLayout l : {ReportLayout::kSummaryTable, ReportLayout::kFullTable,
                         ReportLayout::kDefenseTable}) {
    if (name == ReportLayoutName(l)) return l;
  }
  return absl::InvalidArgumentError(
      absl::StrCat("unknown report layout \"", std::string(name), "\""));
}

std::optional<PublishedReference> FindPublishedReference(
    const std::string& dataset, const std::string& backend, int prompt_id) {
  const std::string d = absl::AsciiStrToLower(dataset);
  const std::string b = absl::AsciiStrToLower(backend);
  for (const RefRow& row : kPublished) {
    if (row.prompt != (prompt_id < 0 ? -1 : prompt_id)) continue;
    if (!absl::StrContains(d, absl::AsciiStrToLower(row.dataset))) continue;
    if (!absl::StrContains(b, row.model)) continue;
    return PublishedReference{row.dataset,  row.model,  row.prompt,
                              row.bb_tpr,   row.bb_fpr, row.gb_tpr,
                              row.bb_auc,   row.gb_auc};
  }
  return std::nullopt;
}

absl::StatusOr<RenderedTable> RenderReportTable(
    const std::vector<MetricsReport>& reports, ReportLayout layout,
    uint64_t seed, const std::string& config_hash) {
  std::vector<std::string> missing;
  std::vector<std::string> header = {"dataset", "model"};
  if (layout != ReportLayout::kSummaryTable) header.push_back("prompt");
  if (layout == ReportLayout::kDefenseTable) {
    for (const char* group : {"without_", "with_"}) {
      for (const char* col : kMetricColumns) header.push_back(group + std::string(col));
    }
    header.push_back("defense_template");
  } else {
    for (const char* col : kMetricColumns) header.push_back(col);
  }
  header.push_back("published_reference");

  std::vector<std::vector<std::string>> rows;
  json json_rows = json::array();
  if (reports.empty()) missing.push_back("no report cells");

  // A gray-box cell carries the black-box columns too, so when both modes
  // ran for the same row the gray-box one stands for it.
  std::map<std::tuple<std::string, std::string, int, std::string>,
           const MetricsReport*>
      by_row;
  for (const MetricsReport& r : reports) {
    auto& slot = by_row[{r.cell.dataset, r.cell.backend, r.cell.prompt_id,
                         r.cell.template_kind}];
    if (slot == nullptr ||
        (!slot->graybox_auc.has_value() && r.graybox_auc.has_value())) {
      slot = &r;
    }
  }
  std::vector<const MetricsReport*> cells_in;
  for (const auto& [key, r] : by_row) cells_in.push_back(r);

  switch (layout) {
    case ReportLayout::kSummaryTable: {
      // Best prompt per (dataset, backend), judged by gray-box AUC when
      // available and black-box AUC otherwise.
      std::map<std::pair<std::string, std::string>, const MetricsReport*> best;
      auto key_of = [](const MetricsReport& r) {
        return r.graybox_auc.value_or(r.blackbox_auc);
      };
      for (const MetricsReport* r : cells_in) {
        if (IsDefended(r->cell.template_kind)) continue;
        auto& slot = best[{r->cell.dataset, r->cell.backend}];
        if (slot == nullptr || key_of(*r) > key_of(*slot)) slot = r;
      }
      if (!reports.empty() && best.empty()) {
        missing.push_back("no undefended cells");
      }
      for (const auto& [key, r] : best) {
        std::vector<std::string> cells = {key.first, key.second};
        json row = {{"dataset", key.first}, {"model", key.second}};
        AppendMetrics(*r, cells, row, "", missing);
        AppendReference(*r, -1, row, cells);
        rows.push_back(std::move(cells));
        json_rows.push_back(std::move(row));
      }
      break;
    }
    case ReportLayout::kFullTable: {
      std::vector<const MetricsReport*> sorted;
      for (const MetricsReport* r : cells_in) {
        if (!IsDefended(r->cell.template_kind)) sorted.push_back(r);
      }
      if (!reports.empty() && sorted.empty()) {
        missing.push_back("no undefended cells");
      }
      std::sort(sorted.begin(), sorted.end(), [](auto* a, auto* b) {
        return std::tie(a->cell.dataset, a->cell.backend, a->cell.prompt_id) <
               std::tie(b->cell.dataset, b->cell.backend, b->cell.prompt_id);
      });
      for (const MetricsReport* r : sorted) {
        std::vector<std::string> cells = {r->cell.dataset, r->cell.backend,
                                          absl::StrCat(r->cell.prompt_id)};
        json row = {{"dataset", r->cell.dataset},
                    {"model", r->cell.backend},
                    {"prompt", r->cell.prompt_id}};
        AppendMetrics(*r, cells, row, "", missing);
        AppendReference(*r, r->cell.prompt_id, row, cells);
        rows.push_back(std::move(cells));
        json_rows.push_back(std::move(row));
      }
      break;
    }
    case ReportLayout::kDefenseTable: {
      using Key = std::tuple<std::string, std::string, int>;
      std::map<Key, const MetricsReport*> without;
      std::map<Key, std::vector<const MetricsReport*>> with;
      for (const MetricsReport* r : cells_in) {
        Key key{r->cell.dataset, r->cell.backend, r->cell.prompt_id};
        if (IsDefended(r->cell.template_kind)) {
          with[key].push_back(r);
        } else {
          without[key] = r;
        }
      }
      for (const auto& [key, defended] : with) {
        auto it = without.find(key);
        if (it == without.end()) {
          missing.push_back(absl::StrCat(std::get<0>(key), "__",
                                         std::get<1>(key), "__p",
                                         std::get<2>(key),
                                         ": undefended cell"));
          continue;
        }
        for (const MetricsReport* d : defended) {
          std::vector<std::string> cells = {std::get<0>(key), std::get<1>(key),
                                            absl::StrCat(std::get<2>(key))};
          json row = {{"dataset", std::get<0>(key)},
                      {"model", std::get<1>(key)},
                      {"prompt", std::get<2>(key)}};
          AppendMetrics(*it->second, cells, row, "without_", missing);
          AppendMetrics(*d, cells, row, "with_", missing);
          cells.push_back(d->cell.template_kind);
          row["defense_template"] = d->cell.template_kind;
          AppendReference(*d, -1, row, cells);
          rows.push_back(std::move(cells));
          json_rows.push_back(std::move(row));
        }
      }
      if (!reports.empty() && with.empty()) {
        missing.push_back("no defended cells");
      }
      break;
    }
  }
  if (!missing.empty()) {
    return absl::FailedPreconditionError(
        absl::StrCat("incomplete report cells: ", absl::StrJoin(missing, "; ")));
  }

  RenderedTable out;
  absl::StrAppend(&out.csv, "# layout=", std::string(ReportLayoutName(layout)),
                  "\n",
                  "# seed=", seed, "\n", "# config_hash=", config_hash, "\n");
  std::vector<std::string> quoted;
  for (const std::string& h : header) quoted.push_back(CsvField(h));
  absl::StrAppend(&out.csv, absl::StrJoin(quoted, ","), "\n");
  for (const auto& row : rows) {
    quoted.clear();
    for (const std::string& c : row) quoted.push_back(CsvField(c));
    absl::StrAppend(&out.csv, absl::StrJoin(quoted, ","), "\n");
  }
  json doc;
  doc["header"] = {{"layout", std::string(ReportLayoutName(layout))},
                   {"seed", seed},
                   {"config_hash", config_hash}};
  doc["columns"] = header;
  doc["rows"] = std::move(json_rows);
  out.json = doc.dump(2) + "\n";
  return out;
}

}  // namespace ragaudit
