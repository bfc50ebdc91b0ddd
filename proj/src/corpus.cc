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

#include "ragaudit/corpus.h"

#include <algorithm>
#include <filesystem>
#include <optional>
#include <set>
#include <unordered_map>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "ragaudit/util.h"

namespace ragaudit {
namespace {

namespace fs = std::filesystem;

struct RawRecord {
  std::optional<std::string> id;
  std::string body;
  std::optional<std::string> kind;
  std::map<std::string, std::string> metadata;
};

absl::StatusOr<std::vector<RawRecord>> ParseJsonl(std::string_view content) {
  std::vector<RawRecord> records;
  size_t line_no = 0;
  for (std::string_view line : SplitString(content, '\n')) {
    ++line_no;
    line = TrimWhitespace(line);
    if (line.empty()) continue;
    nlohmann::json j = nlohmann::json::parse(line, nullptr, false);
    if (j.is_discarded() || !j.is_object()) {
      return absl::InvalidArgumentError(
          absl::StrCat("malformed record ", line_no, ": not a JSON object"));
    }
    auto body = j.find("body");
    if (body == j.end() || !body->is_string()) {
      return absl::InvalidArgumentError(absl::StrCat(
          "malformed record ", line_no, ": missing string field \"body\""));
    }
    RawRecord rec;
    rec.body = body->get<std::string>();
    if (auto id = j.find("id"); id != j.end() && !id->is_null()) {
      if (!id->is_string()) {
        return absl::InvalidArgumentError(
            absl::StrCat("malformed record ", line_no, ": \"id\" not a string"));
      }
      rec.id = id->get<std::string>();
    }
    if (auto kind = j.find("kind"); kind != j.end() && !kind->is_null()) {
      if (!kind->is_string()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "malformed record ", line_no, ": \"kind\" not a string"));
      }
      rec.kind = kind->get<std::string>();
    }
    for (auto& [key, value] : j.items()) {
      if (key == "id" || key == "body" || key == "kind") continue;
      rec.metadata[key] = value.is_string() ? value.get<std::string>()
                                            : value.dump();
    }
    records.push_back(std::move(rec));
  }
  return records;
}

// RFC 4180 rows. Quoted fields may contain separators, quotes ("") and
// newlines.
absl::StatusOr<std::vector<std::vector<std::string>>> ParseCsvRows(
    std::string_view content) {
  std::vector<std::vector<std::string>> rows;
  std::vector<std::string> row;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  size_t row_no = 1;
  auto end_field = [&] {
    row.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_row = [&] {
    end_field();
    if (!(row.size() == 1 && row[0].empty())) rows.push_back(std::move(row));
    row.clear();
    ++row_no;
  };
  for (size_t i = 0; i < content.size(); ++i) {
    char c = content[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < content.size() && content[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        field.push_back(c);
      }
      continue;
    }
    if (c == '"') {
      if (field_started) {
        return absl::InvalidArgumentError(
            absl::StrCat("malformed record ", row_no, ": stray quote"));
      }
      in_quotes = true;
      field_started = true;
    } else if (c == ',') {
      end_field();
    } else if (c == '\n') {
      end_row();
    } else if (c == '\r') {
      // CRLF line endings.
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (in_quotes) {
    return absl::InvalidArgumentError(
        absl::StrCat("malformed record ", row_no, ": unterminated quote"));
  }
  if (field_started || !row.empty() || !field.empty()) end_row();
  return rows;
}

absl::StatusOr<std::vector<RawRecord>> ParseCsv(std::string_view content) {
  auto rows = ParseCsvRows(content);
  if (!rows.ok()) return rows.status();
  if (rows->empty()) return std::vector<RawRecord>{};
  const std::vector<std::string>& header = rows->front();
  int id_col = -1, body_col = -1, kind_col = -1;
  for (size_t c = 0; c < header.size(); ++c) {
    std::string_view name = TrimWhitespace(header[c]);
    if (name == "id") id_col = static_cast<int>(c);
    if (name == "body") body_col = static_cast<int>(c);
    if (name == "kind") kind_col = static_cast<int>(c);
  }
  if (body_col < 0) {
    return absl::InvalidArgumentError("CSV header has no \"body\" column");
  }
  std::vector<RawRecord> records;
  for (size_t r = 1; r < rows->size(); ++r) {
    const auto& row = (*rows)[r];
    if (row.size() != header.size()) {
      return absl::InvalidArgumentError(
          absl::StrCat("malformed record ", r, ": expected ", header.size(),
                       " fields, got ", row.size()));
    }
    RawRecord rec;
    rec.body = row[body_col];
    if (id_col >= 0 && !row[id_col].empty()) rec.id = row[id_col];
    if (kind_col >= 0 && !row[kind_col].empty()) rec.kind = row[kind_col];
    for (size_t c = 0; c < header.size(); ++c) {
      if (static_cast<int>(c) == id_col || static_cast<int>(c) == body_col ||
          static_cast<int>(c) == kind_col) {
        continue;
      }
      rec.metadata[header[c]] = row[c];
    }
    records.push_back(std::move(rec));
  }
  return records;
}

absl::StatusOr<std::vector<Document>> ToDocuments(
    std::vector<RawRecord> records, DatasetKind default_kind) {
  if (records.empty()) return absl::InvalidArgumentError("empty corpus");
  std::vector<Document> docs;
  docs.reserve(records.size());
  std::unordered_map<std::string, int> seen_content;
  std::set<std::string> ids;
  for (size_t i = 0; i < records.size(); ++i) {
    RawRecord& rec = records[i];
    if (TrimWhitespace(rec.body).empty()) {
      return absl::InvalidArgumentError(
          absl::StrCat("malformed record ", i + 1, ": empty body"));
    }
    Document doc;
    doc.kind = default_kind;
    if (rec.kind) {
      auto kind = ParseDatasetKind(*rec.kind);
      if (!kind.ok()) {
        return absl::InvalidArgumentError(absl::StrCat(
            "malformed record ", i + 1, ": ", kind.status().message()));
      }
      doc.kind = *kind;
    }
    if (rec.id) {
      doc.id = *rec.id;
    } else {
      std::string key = absl::StrCat(std::string(DatasetKindName(doc.kind)),
                                     std::string("\0", 1), rec.body);
      doc.id = absl::StrCat("doc-", Hex64(Fnv1a64(key)));
      int& dup = seen_content[doc.id];
      if (++dup > 1) absl::StrAppend(&doc.id, "-", dup);
    }
    if (!ids.insert(doc.id).second) {
      return absl::InvalidArgumentError(
          absl::StrCat("malformed record ", i + 1, ": duplicate id ", doc.id));
    }
    doc.body = std::move(rec.body);
    doc.metadata = std::move(rec.metadata);
    docs.push_back(std::move(doc));
  }
  return docs;
}

// Finds the earliest occurrence of any marker at or after `from`.
// Returns {position, marker length}, or npos when none occurs.
std::pair<size_t, size_t> FindMarker(std::string_view text,
                                     const std::vector<std::string>& markers,
                                     size_t from) {
  size_t best = std::string_view::npos, best_len = 0;
  for (const std::string& m : markers) {
    if (m.empty()) continue;
    size_t pos = text.find(m, from);
    if (pos < best) {
      best = pos;
      best_len = m.size();
    }
  }
  return {best, best_len};
}

}  // namespace

std::string_view DatasetKindName(DatasetKind kind) {
  switch (kind) {
    case DatasetKind::kEmail:
      return "email";
    case DatasetKind::kQaDialogue:
      return "qa_dialogue";
    case DatasetKind::kGeneric:
      return "generic";
  }
  return "generic";
}

absl::StatusOr<DatasetKind> ParseDatasetKind(std::string_view name) {
  if (name == "email") return DatasetKind::kEmail;
  if (name == "qa_dialogue") return DatasetKind::kQaDialogue;
  if (name == "generic") return DatasetKind::kGeneric;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown dataset kind \"", std::string(name), "\""));
}

absl::StatusOr<CorpusFormat> ParseCorpusFormat(std::string_view name) {
  if (name == "jsonl") return CorpusFormat::kJsonl;
  if (name == "csv") return CorpusFormat::kCsv;
  if (name == "plain_dir") return CorpusFormat::kPlainDir;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown corpus format \"", std::string(name), "\""));
}

absl::StatusOr<std::vector<Document>> ParseCorpus(std::string_view content,
                                                  CorpusFormat format,
                                                  DatasetKind default_kind) {
  absl::StatusOr<std::vector<RawRecord>> records;
  switch (format) {
    case CorpusFormat::kJsonl:
      records = ParseJsonl(content);
      break;
    case CorpusFormat::kCsv:
      records = ParseCsv(content);
      break;
    case CorpusFormat::kPlainDir:
      return absl::InvalidArgumentError(
          "plain_dir corpora must be loaded from a directory");
  }
  if (!records.ok()) return records.status();
  return ToDocuments(*std::move(records), default_kind);
}

absl::StatusOr<std::vector<Document>> LoadCorpus(const std::string& path,
                                                 CorpusFormat format,
                                                 DatasetKind default_kind) {
  if (format != CorpusFormat::kPlainDir) {
    std::string content;
    if (!ReadFileToString(path, &content)) {
      return absl::NotFoundError(absl::StrCat("cannot read corpus ", path));
    }
    return ParseCorpus(content, format, default_kind);
  }
  std::error_code ec;
  if (!fs::is_directory(path, ec)) {
    return absl::NotFoundError(
        absl::StrCat("corpus directory not readable: ", path));
  }
  std::vector<fs::path> files;
  for (const auto& entry : fs::directory_iterator(path, ec)) {
    if (entry.is_regular_file()) files.push_back(entry.path());
  }
  if (ec) return absl::NotFoundError(absl::StrCat("cannot list ", path));
  std::sort(files.begin(), files.end());
  std::vector<RawRecord> records;
  for (const fs::path& file : files) {
    RawRecord rec;
    if (!ReadFileToString(file.string(), &rec.body)) {
      return absl::NotFoundError(absl::StrCat("cannot read ", file.string()));
    }
    rec.metadata["filename"] = file.filename().string();
    records.push_back(std::move(rec));
  }
  return ToDocuments(std::move(records), default_kind);
}

absl::StatusOr<CorpusSplit> SplitMembers(const std::vector<Document>& docs,
                                         size_t member_count, uint64_t seed) {
  if (member_count > docs.size()) {
    return absl::OutOfRangeError(
        absl::StrCat("member_count ", member_count, " exceeds corpus size ",
                     docs.size()));
  }
  std::vector<const Document*> order;
  order.reserve(docs.size());
  for (const Document& d : docs) order.push_back(&d);
  std::sort(order.begin(), order.end(),
            [](const Document* a, const Document* b) { return a->id < b->id; });

  Rng rng(seed);
  std::vector<size_t> picked = rng.SampleIndices(order.size(), member_count);
  std::vector<bool> is_member(order.size(), false);
  for (size_t i : picked) is_member[i] = true;

  CorpusSplit split;
  split.seed = seed;
  for (size_t i = 0; i < order.size(); ++i) {
    (is_member[i] ? split.members : split.non_members).push_back(*order[i]);
  }
  return split;
}

absl::StatusOr<TargetSample> ExtractTargetSample(const Document& doc,
                                                 const TargetOptions& options) {
  TargetSample sample;
  sample.source_id = doc.id;
  switch (doc.kind) {
    case DatasetKind::kEmail: {
      std::string_view prefix = Utf8Prefix(doc.body, options.email_max_chars);
      sample.truncated = prefix.size() < doc.body.size();
      sample.text = std::string(prefix);
      return sample;
    }
    case DatasetKind::kGeneric:
      sample.text = doc.body;
      return sample;
    case DatasetKind::kQaDialogue:
      break;
  }

  std::vector<std::string> all_markers = options.markers.human;
  all_markers.insert(all_markers.end(), options.markers.other.begin(),
                     options.markers.other.end());
  std::string_view body = doc.body;
  std::vector<std::string_view> turns;
  size_t pos = 0;
  while (true) {
    auto [start, len] = FindMarker(body, options.markers.human, pos);
    if (start == std::string_view::npos) break;
    size_t turn_begin = start + len;
    auto [next, unused] = FindMarker(body, all_markers, turn_begin);
    std::string_view turn = TrimWhitespace(body.substr(
        turn_begin, next == std::string_view::npos ? std::string_view::npos
                                                   : next - turn_begin));
    if (!turn.empty()) turns.push_back(turn);
    if (!options.markers.all_human_turns && !turns.empty()) break;
    if (next == std::string_view::npos) break;
    pos = next;
  }
  if (turns.empty()) {
    return absl::InvalidArgumentError(
        absl::StrCat("document ", doc.id, " has no detectable human turn"));
  }
  for (size_t i = 0; i < turns.size(); ++i) {
    if (i > 0) sample.text.push_back(' ');
    sample.text.append(turns[i]);
  }
  return sample;
}

}  // namespace ragaudit
