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

// Corpus loading, member/non-member splitting and target sample extraction.

#ifndef RAGAUDIT_CORPUS_H_
#define RAGAUDIT_CORPUS_H_

#include <cstdint>
#include <map>
#include <string>
#include <string_view>
#include <vector>

#include "absl/status/statusor.h"

namespace ragaudit {

enum class DatasetKind { kEmail, kQaDialogue, kGeneric };

std::string_view DatasetKindName(DatasetKind kind);
absl::StatusOr<DatasetKind> ParseDatasetKind(std::string_view name);

struct Document {
  std::string id;
  std::string body;
  DatasetKind kind = DatasetKind::kGeneric;
  std::map<std::string, std::string> metadata;

  friend bool operator==(const Document&, const Document&) = default;
};

// Partition of a corpus into documents stored in the retrieval database
// (members) and held-out documents (non-members). Both sides are sorted by id.
struct CorpusSplit {
  std::vector<Document> members;
  std::vector<Document> non_members;
  uint64_t seed = 0;
};

// The excerpt of a document that is quoted inside attack prompts.
struct TargetSample {
  std::string source_id;
  std::string text;
  bool truncated = false;
};

enum class CorpusFormat { kJsonl, kCsv, kPlainDir };

absl::StatusOr<CorpusFormat> ParseCorpusFormat(std::string_view name);

// Loads every record of a corpus file or directory.
//
// Records without an explicit id get a content-derived one
// ("doc-<fnv64 of kind and body>"), so reordering the file leaves ids
// unchanged. Identical bodies are disambiguated by a "-<n>" suffix in file
// order. `default_kind` applies to records that carry no kind.
absl::StatusOr<std::vector<Document>> LoadCorpus(
    const std::string& path, CorpusFormat format,
    DatasetKind default_kind = DatasetKind::kGeneric);

// Same as LoadCorpus for JSONL/CSV content already in memory.
absl::StatusOr<std::vector<Document>> ParseCorpus(
    std::string_view content, CorpusFormat format,
    DatasetKind default_kind = DatasetKind::kGeneric);

// Seeded member selection. Input order does not matter: documents are
// canonicalized by id before shuffling.
absl::StatusOr<CorpusSplit> SplitMembers(const std::vector<Document>& docs,
                                         size_t member_count, uint64_t seed);

struct DialogueMarkers {
  std::vector<std::string> human = {"Human:", "Patient:"};
  std::vector<std::string> other = {"Assistant:", "Doctor:", "AI:"};
  // When set, all human turns are joined with a single space instead of
  // keeping only the first one.
  bool all_human_turns = false;
};

struct TargetOptions {
  size_t email_max_chars = 1000;
  DialogueMarkers markers;
};

absl::StatusOr<TargetSample> ExtractTargetSample(
    const Document& doc, const TargetOptions& options = {});

}  // namespace ragaudit

#endif  // RAGAUDIT_CORPUS_H_
