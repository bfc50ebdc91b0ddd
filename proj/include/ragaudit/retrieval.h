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

// The retrieval database: embedded documents searchable top-k by squared L2
// distance, either exhaustively or through an HNSW graph.

#ifndef RAGAUDIT_RETRIEVAL_H_
#define RAGAUDIT_RETRIEVAL_H_

#include <cstdint>
#include <functional>
#include <span>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include "absl/status/statusor.h"
#include "ragaudit/corpus.h"
#include "ragaudit/model.h"

namespace ragaudit {

enum class IndexKind { kBruteForce, kHnsw };

std::string_view IndexKindName(IndexKind kind);
absl::StatusOr<IndexKind> ParseIndexKind(std::string_view name);

struct HnswParams {
  int m = 16;
  int ef_construction = 200;
  int ef_search = 64;
  // Seeds the level assignment; the graph is a pure function of
  // (entries, params).
  uint64_t seed = 42;

  friend bool operator==(const HnswParams&, const HnswParams&) = default;
};

struct BuildOptions {
  IndexKind kind = IndexKind::kBruteForce;
  HnswParams hnsw;
  // Chunking is off when zero: one entry per document.
  size_t chunk_chars = 0;
  size_t chunk_overlap = 0;
};

struct IndexEntry {
  std::string id;
  // Document the entry was cut from; equals `id` without chunking.
  std::string source_id;
  EmbeddingVector vector;
  std::string text;

  friend bool operator==(const IndexEntry&, const IndexEntry&) = default;
};

struct RetrievalHit {
  std::string doc_id;
  std::string source_id;
  // Squared L2.
  float distance = 0.0f;
  // 1-based.
  int rank = 0;
};

float SquaredL2(std::span<const float> a, std::span<const float> b);

class RetrievalIndex {
 public:
  static absl::StatusOr<RetrievalIndex> Build(const std::vector<Document>& docs,
                                              const Embedder& embedder,
                                              const BuildOptions& options = {});

  // Builds from precomputed embeddings. Fails on a dimension mismatch,
  // non-finite values or duplicate ids.
  static absl::StatusOr<RetrievalIndex> FromEntries(
      std::vector<IndexEntry> entries, size_t dimension, IndexKind kind,
      const HnswParams& params = {});

  size_t dimension() const { return dimension_; }
  size_t size() const { return entries_.size(); }
  IndexKind kind() const { return kind_; }
  const HnswParams& params() const { return params_; }
  const std::vector<IndexEntry>& entries() const { return entries_; }
  const IndexEntry* Find(std::string_view id) const;

  // Top-k hits sorted by (distance, id). Uses the graph for HNSW indexes.
  absl::StatusOr<std::vector<RetrievalHit>> SearchVector(
      std::span<const float> query, size_t k) const;

  // Exhaustive scan regardless of index kind.
  absl::StatusOr<std::vector<RetrievalHit>> SearchExhaustive(
      std::span<const float> query, size_t k) const;

  // Versioned little-endian binary image, graph included.
  std::string Serialize() const;
  static absl::StatusOr<RetrievalIndex> Deserialize(std::string_view bytes);

 private:
  RetrievalIndex() = default;

  absl::Status CheckQuery(std::span<const float> query, size_t k) const;
  void BuildGraph();
  void InsertNode(uint32_t node);
  std::vector<std::pair<float, uint32_t>> SearchLayer(
      std::span<const float> query, uint32_t entry, size_t ef, int level) const;
  std::vector<uint32_t> SelectNeighbors(
      std::vector<std::pair<float, uint32_t>> candidates, size_t m) const;
  float Distance(uint32_t a, uint32_t b) const;
  std::vector<RetrievalHit> ToHits(
      std::vector<std::pair<float, uint32_t>> scored, size_t k) const;

  size_t dimension_ = 0;
  IndexKind kind_ = IndexKind::kBruteForce;
  HnswParams params_;
  std::vector<IndexEntry> entries_;
  std::unordered_map<std::string, uint32_t> by_id_;

  // HNSW graph: links_[node][level] lists neighbor nodes.
  std::vector<std::vector<std::vector<uint32_t>>> links_;
  int max_level_ = -1;
  uint32_t entry_point_ = 0;
};

absl::StatusOr<std::vector<RetrievalHit>> Search(const RetrievalIndex& index,
                                                 std::string_view query_text,
                                                 const Embedder& embedder,
                                                 size_t k);

struct RetrievalMatch {
  size_t equal_count = 0;
  size_t total_count = 0;
  double equal_percent = 0.0;
};

// Counts samples whose source document is among the top-k hits of the full
// attack prompt built from them.
absl::StatusOr<RetrievalMatch> RetrievalMatchRate(
    const RetrievalIndex& index, const std::vector<TargetSample>& samples,
    const std::function<std::string(const TargetSample&)>& prompt_builder,
    const Embedder& embedder, size_t k);

}  // namespace ragaudit

#endif  // RAGAUDIT_RETRIEVAL_H_
