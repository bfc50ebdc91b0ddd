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

#include <string>
#include <vector>

#include "absl/strings/str_split.h"
#include "gtest/gtest.h"
#include "json.hpp"
#include "test_util.h"

namespace ragaudit {
namespace {

using nlohmann::json;

MetricsReport Cell(std::string dataset, std::string backend, int prompt,
                   std::string templ, std::string mode, double bb_tpr,
                   std::optional<double> gb_auc) {
  MetricsReport r;
  r.cell = {dataset, backend, prompt, templ, mode};
  r.seed = 7;
  r.config_hash = "abc";
  r.blackbox_tpr = bb_tpr;
  r.blackbox_fpr = 0.1;
  r.blackbox_auc = (bb_tpr + 0.9) / 2;
  r.graybox_auc = gb_auc;
  if (gb_auc) r.graybox_tpr_at_fpr0 = 0.25;
  r.missing = {3, 100, 3.0};
  RunMetrics m;
  m.blackbox_tpr = bb_tpr;
  m.blackbox_fpr = 0.1;
  m.blackbox_auc = r.blackbox_auc;
  m.graybox_auc = gb_auc;
  m.graybox_tpr_at_fpr0 = r.graybox_tpr_at_fpr0;
  r.runs = {m};
  r.attack_calls = 200;
  return r;
}

std::vector<std::string> CsvLines(const std::string& csv) {
  return absl::StrSplit(csv, '\n', absl::SkipEmpty());
}

TEST(CellKeyTest, Id) {
  CellKey k{"enron", "sim", 3, "plain", "graybox"};
  EXPECT_EQ(k.Id(), "enron__sim__p3__plain__graybox");
}

TEST(ReportJsonTest, RoundTrip) {
  MetricsReport r = Cell("d", "b", 2, "plain", "graybox", 0.9, 0.95);
  r.retrieval_match_member_percent = 99.5;
  r.simulated = false;
  ASSERT_OK_AND_ASSIGN(MetricsReport back,
                       ReportFromJson(json::parse(ReportToJson(r).dump())));
  EXPECT_EQ(back, r);
  MetricsReport bb = Cell("d", "b", 2, "plain", "blackbox", 0.9, std::nullopt);
  EXPECT_EQ(*ReportFromJson(ReportToJson(bb)), bb);
  EXPECT_EQ(ReportFromJson(json::object()).status().code(),
            absl::StatusCode::kDataLoss);
}

TEST(AverageRunsTest, MeansOverRuns) {
  MetricsReport r;
  for (int i = 0; i < 4; ++i) {
    RunMetrics m;
    m.run = i;
    m.blackbox_tpr = 0.1 * i;
    m.blackbox_fpr = 0.05;
    m.blackbox_auc = 0.5 + 0.1 * i;
    m.graybox_auc = 0.6 + 0.1 * i;
    m.graybox_tpr_at_fpr0 = 0.0;
    r.runs.push_back(m);
  }
  AverageRuns(r);
  EXPECT_NEAR(r.blackbox_tpr, 0.15, 1e-12);
  EXPECT_NEAR(r.blackbox_auc, 0.65, 1e-12);
  EXPECT_NEAR(*r.graybox_auc, 0.75, 1e-12);
  // A run without gray-box values leaves the mean unset.
  r.runs[2].graybox_auc.reset();
  AverageRuns(r);
  EXPECT_FALSE(r.graybox_auc.has_value());
}

TEST(LayoutTest, NamesRoundTrip) {
  for (ReportLayout l : {ReportLayout::kSummaryTable, ReportLayout::kFullTable,
                         ReportLayout::kDefenseTable}) {
    EXPECT_EQ(*ParseReportLayout(ReportLayoutName(l)), l);
  }
  EXPECT_FALSE(ParseReportLayout("table9").ok());
}

TEST(RenderTest, SummaryPicksTheBestPromptPerModel) {
  std::vector<MetricsReport> cells = {
      Cell("enron", "sim", 0, "plain", "graybox", 0.8, 0.90),
      Cell("enron", "sim", 2, "plain", "graybox", 0.7, 0.97),
      Cell("enron", "sim", 3, "plain", "graybox", 0.9, 0.93),
      Cell("enron", "sim", 2, "defended", "graybox", 0.0, 0.99)};
  ASSERT_OK_AND_ASSIGN(RenderedTable t,
                       RenderReportTable(cells, ReportLayout::kSummaryTable, 7, "abc"));
  auto lines = CsvLines(t.csv);
  ASSERT_EQ(lines.size(), 5u);
  EXPECT_EQ(lines[0], "# layout=summary_table");
  EXPECT_EQ(lines[1], "# seed=7");
  EXPECT_EQ(lines[2], "# config_hash=abc");
  EXPECT_EQ(lines[3],
            "dataset,model,bb_tpr,bb_fpr,gb_tpr_at_low_fpr,bb_auc,gb_auc,"
            "published_reference");
  EXPECT_EQ(lines[4], "enron,sim,0.7000,0.1000,0.2500,0.8000,0.9700,");
  json doc = json::parse(t.json);
  EXPECT_EQ(doc["rows"].size(), 1u);
  EXPECT_EQ(doc["rows"][0]["gb_auc"], 0.97);
  EXPECT_TRUE(doc["rows"][0]["published_reference"].is_null());
}

TEST(RenderTest, FullTableIsSortedAndPrefersGrayboxCells) {
  std::vector<MetricsReport> cells = {
      Cell("enron", "sim", 3, "plain", "graybox", 0.9, 0.93),
      Cell("enron", "sim", 1, "plain", "blackbox", 0.6, std::nullopt),
      Cell("enron", "sim", 1, "plain", "graybox", 0.6, 0.81),
      Cell("alpha", "sim", 4, "plain", "graybox", 0.5, 0.70)};
  ASSERT_OK_AND_ASSIGN(RenderedTable t,
                       RenderReportTable(cells, ReportLayout::kFullTable, 1, "h"));
  auto lines = CsvLines(t.csv);
  ASSERT_EQ(lines.size(), 7u);
  EXPECT_EQ(lines[3].substr(0, 22), "dataset,model,prompt,b");
  EXPECT_EQ(lines[4].substr(0, 13), "alpha,sim,4,0");
  EXPECT_EQ(lines[5].substr(0, 13), "enron,sim,1,0");
  EXPECT_EQ(lines[6].substr(0, 13), "enron,sim,3,0");
}

TEST(RenderTest, DefenseTablePairsCells) {
  std::vector<MetricsReport> cells = {
      Cell("enron", "sim", 2, "plain", "graybox", 0.9, 0.96),
      Cell("enron", "sim", 2, "defended", "graybox", 0.03, 0.60)};
  ASSERT_OK_AND_ASSIGN(RenderedTable t,
                       RenderReportTable(cells, ReportLayout::kDefenseTable, 1, "h"));
  json doc = json::parse(t.json);
  ASSERT_EQ(doc["rows"].size(), 1u);
  EXPECT_EQ(doc["rows"][0]["without_bb_tpr"], 0.9);
  EXPECT_EQ(doc["rows"][0]["with_bb_tpr"], 0.03);
  EXPECT_EQ(doc["rows"][0]["defense_template"], "defended");
  EXPECT_EQ(doc["columns"].size(), 3u + 10u + 2u);
  // The defended cell alone cannot form a row.
  EXPECT_EQ(RenderReportTable({cells[1]}, ReportLayout::kDefenseTable, 1, "h")
                .status()
                .code(),
            absl::StatusCode::kFailedPrecondition);
}

TEST(RenderTest, IncompleteCellsAreReported) {
  EXPECT_EQ(RenderReportTable({}, ReportLayout::kSummaryTable, 1, "h").status().code(),
            absl::StatusCode::kFailedPrecondition);
  auto r = RenderReportTable(
      {Cell("enron", "sim", 2, "plain", "blackbox", 0.9, std::nullopt)},
      ReportLayout::kFullTable, 1, "h");
  ASSERT_FALSE(r.ok());
  EXPECT_NE(r.status().message().find("enron__sim__p2__plain__blackbox: gb_auc"),
            std::string::npos);
}

TEST(RenderTest, ByteIdenticalForTheSameInput) {
  std::vector<MetricsReport> cells = {
      Cell("enron", "sim", 0, "plain", "graybox", 0.8, 0.90),
      Cell("enron", "sim", 2, "plain", "graybox", 0.7, 0.97)};
  auto a = *RenderReportTable(cells, ReportLayout::kFullTable, 3, "h");
  std::swap(cells[0], cells[1]);
  auto b = *RenderReportTable(cells, ReportLayout::kFullTable, 3, "h");
  EXPECT_EQ(a.csv, b.csv);
  EXPECT_EQ(a.json, b.json);
}

TEST(PublishedReferenceTest, OnlyRealBackendsAreLabelled) {
  auto ref = FindPublishedReference("enron-emails", "llama-3.1-8b", 2);
  ASSERT_TRUE(ref.has_value());
  EXPECT_EQ(ref->blackbox_tpr, 0.91);
  EXPECT_EQ(ref->graybox_auc, 0.83);
  EXPECT_FALSE(FindPublishedReference("enron", "gpt", 2).has_value());

  MetricsReport real = Cell("Enron", "llama", 2, "plain", "graybox", 0.8, 0.8);
  real.simulated = false;
  auto t = *RenderReportTable({real}, ReportLayout::kFullTable, 1, "h");
  json row = json::parse(t.json)["rows"][0];
  EXPECT_EQ(row["published_reference"]["bb_fpr"], 0.38);
  EXPECT_NE(t.csv.find(",Enron/llama bb_tpr=0.91 "), std::string::npos);

  MetricsReport other = real;
  other.cell.backend = "gpt";
  row = json::parse(RenderReportTable({other}, ReportLayout::kFullTable, 1, "h")
                        ->json)["rows"][0];
  EXPECT_EQ(row["published_reference"], "none");
}

}  // namespace
}  // namespace ragaudit
