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

#ifndef RAGAUDIT_SYNTHETIC_CORPUS_H_
#define RAGAUDIT_SYNTHETIC_CORPUS_H_

#include <cstdint>
#include <string>
#include <vector>

#include "ragaudit/corpus.h"

namespace ragaudit {

// Seeded generator of pseudo-text corpora for offline experiments. Emails get
// a subject line and a signature; dialogues use "Patient:" / "Doctor:" turns.
struct SyntheticCorpusOptions {
  size_t count = 1000;
  DatasetKind kind = DatasetKind::kEmail;
  uint64_t seed = 0;
  size_t min_words = 40;
  size_t max_words = 160;
  size_t vocabulary_size = 4000;
};

std::vector<Document> SynthesizeCorpus(const SyntheticCorpusOptions& options);

// Serializes documents as JSONL records {"id","body","kind"}.
std::string DocumentsToJsonl(const std::vector<Document>& docs);

}  // namespace ragaudit

#endif  // RAGAUDIT_SYNTHETIC_CORPUS_H_
