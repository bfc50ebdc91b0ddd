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

#include "ragaudit/retrieval.h"

#include <algorithm>
#include <cmath>
#include <cstring>
#include <queue>

#include "absl/status/status.h"
#include "absl/strings/str_cat.h"
#include "ragaudit/status_macros.h"
#include "ragaudit/util.h"

namespace ragaudit {
namespace {

constexpr char kMagic[4] = {'R', 'G', 'A', 'I'};
constexpr uint32_t kFormatVersion = 1;

using Scored = std::pair<float, uint32_t>;

class ByteWriter {
 public:
  void U32(uint32_t v) { Raw(v); }
  void U64(uint64_t v) { Raw(v); }
  void I32(int32_t v) { Raw(static_cast<uint32_t>(v)); }
  void F32(float v) {
    uint32_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    Raw(bits);
  }
  void Str(std::string_view s) {
    U64(s.size());
    out_.append(s);
  }
  void Bytes(const char* p, size_t n) { out_.append(p, n); }
  std::string Take() { return std::move(out_); }

 private:
  template <typename T>
  void Raw(T v) {
    for (size_t i = 0; i < sizeof(T); ++i) {
      out_.push_back(static_cast<char>((v >> (8 * i)) & 0xff));
    }
  }
  std::string out_;
};

class ByteReader {
 public:
  explicit ByteReader(std::string_view in) : in_(in) {}

  bool U32(uint32_t* v) { return Raw(v); }
  bool U64(uint64_t* v) { return Raw(v); }
  bool I32(int32_t* v) {
    uint32_t u;
    if (!Raw(&u)) return false;
    *v = static_cast<int32_t>(u);
    return true;
  }
  bool F32(float* v) {
    uint32_t bits;
    if (!Raw(&bits)) return false;
    std::memcpy(v, &bits, sizeof bits);
    return true;
  }
  bool Str(std::string* s) {
    uint64_t n;
    if (!U64(&n) || n > in_.size() - pos_) return false;
    s->assign(in_.substr(pos_, n));
    pos_ += n;
    return true;
  }
  bool Bytes(char* p, size_t n) {
    if (n > in_.size() - pos_) return false;
    std::memcpy(p, in_.data() + pos_, n);
    pos_ += n;
    return true;
  }
  bool AtEnd() const { return pos_ == in_.size(); }

 private:
  template <typename T>
  bool Raw(T* v) {
    if (sizeof(T) > in_.size() - pos_) return false;
    T r = 0;
    for (size_t i = 0; i < sizeof(T); ++i) {
      r |= static_cast<T>(static_cast<unsigned char>(in_[pos_ + i])) << (8 * i);
    }
    pos_ += sizeof(T);
    *v = r;
    return true;
  }
  std::string_view in_;
  size_t pos_ = 0;
};

// Max-heap ordering on (distance, node).
struct FartherFirst {
  bool operator()(const Scored& a, const Scored& b) const { return a < b; }
};
// Min-heap ordering on (distance, node).
struct CloserFirst {
  bool operator()(const Scored& a, const Scored& b) const { return a > b; }
};

std::vector<std::pair<std::string, std::string>> Chunk(const Document& doc,
                                                       size_t chunk_chars,
                                                       size_t overlap) {
  std::vector<std::pair<std::string, std::string>> chunks;
  std::string_view rest = doc.body;
  size_t step = chunk_chars > overlap ? chunk_chars - overlap : chunk_chars;
  for (size_t n = 0; !rest.empty(); ++n) {
    std::string_view piece = Utf8Prefix(rest, chunk_chars);
    chunks.emplace_back(absl::StrCat(doc.id, "#", n), std::string(piece));
    if (piece.size() == rest.size()) break;
    rest.remove_prefix(Utf8Prefix(rest, step).size());
  }
  return chunks;
}

}  // namespace

std::string_view IndexKindName(IndexKind kind) {
  return kind == IndexKind::kHnsw ? "hnsw" : "brute_force";
}

absl::StatusOr<IndexKind> ParseIndexKind(std::string_view name) {
  if (name == "hnsw") return IndexKind::kHnsw;
  if (name == "brute_force") return IndexKind::kBruteForce;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown index kind \"", std::string(name), "\""));
}

float SquaredL2(std::span<const float> a, std::span<const float> b) {
  float sum = 0.0f;
  for (size_t i = 0; i < a.size(); ++i) {
    float d = a[i] - b[i];
    sum += d * d;
  }
  return sum;
}

absl::StatusOr<RetrievalIndex> RetrievalIndex::Build(
    const std::vector<Document>& docs, const Embedder& embedder,
    const BuildOptions& options) {
  if (docs.empty()) {
    return absl::InvalidArgumentError("cannot build an index from no documents");
  }
  std::vector<IndexEntry> entries;
  entries.reserve(docs.size());
  for (const Document& doc : docs) {
    std::vector<std::pair<std::string, std::string>> pieces;
    if (options.chunk_chars == 0) {
      pieces.emplace_back(doc.id, doc.body);
    } else {
      pieces = Chunk(doc, options.chunk_chars, options.chunk_overlap);
    }
    for (auto& [id, text] : pieces) {
      auto vec = embedder.Embed(text);
      if (!vec.ok()) {
        return absl::Status(vec.status().code(),
                            absl::StrCat("embedding document ", doc.id, ": ",
                                         vec.status().message()));
      }
      entries.push_back({std::move(id), doc.id, *std::move(vec), std::move(text)});
    }
  }
  return FromEntries(std::move(entries), embedder.dimension(), options.kind,
                     options.hnsw);
}

absl::StatusOr<RetrievalIndex> RetrievalIndex::FromEntries(
    std::vector<IndexEntry> entries, size_t dimension, IndexKind kind,
    const HnswParams& params) {
  if (entries.empty()) {
    return absl::InvalidArgumentError("cannot build an index from no entries");
  }
  if (kind == IndexKind::kHnsw &&
      (params.m < 2 || params.ef_construction < 1 || params.ef_search < 1)) {
    return absl::InvalidArgumentError("HNSW parameters out of range");
  }
  RetrievalIndex index;
  index.dimension_ = dimension;
  index.kind_ = kind;
  index.params_ = params;
  for (size_t i = 0; i < entries.size(); ++i) {
    const IndexEntry& e = entries[i];
    if (e.vector.size() != dimension) {
      return absl::InvalidArgumentError(
          absl::StrCat("dimension mismatch for ", e.id, ": ", e.vector.size(),
                       " != ", dimension));
    }
    for (float x : e.vector) {
      if (!std::isfinite(x)) {
        return absl::InvalidArgumentError(
            absl::StrCat("non-finite embedding for ", e.id));
      }
    }
    if (!index.by_id_.emplace(e.id, static_cast<uint32_t>(i)).second) {
      return absl::InvalidArgumentError(absl::StrCat("duplicate id ", e.id));
    }
  }
  index.entries_ = std::move(entries);
  if (kind == IndexKind::kHnsw) index.BuildGraph();
  return index;
}

const IndexEntry* RetrievalIndex::Find(std::string_view id) const {
  auto it = by_id_.find(std::string(id));
  return it == by_id_.end() ? nullptr : &entries_[it->second];
}

float RetrievalIndex::Distance(uint32_t a, uint32_t b) const {
  return SquaredL2(entries_[a].vector, entries_[b].vector);
}

void RetrievalIndex::BuildGraph() {
  const size_t n = entries_.size();
  links_.assign(n, {});
  max_level_ = -1;
  entry_point_ = 0;
  Rng rng(params_.seed);
  const double level_mult = 1.0 / std::log(static_cast<double>(params_.m));
  for (uint32_t node = 0; node < n; ++node) {
    double u = 1.0 - rng.NextDouble();  // (0, 1]
    int level = static_cast<int>(std::floor(-std::log(u) * level_mult));
    links_[node].resize(level + 1);
    InsertNode(node);
  }
}

void RetrievalIndex::InsertNode(uint32_t node) {
  const int level = static_cast<int>(links_[node].size()) - 1;
  if (max_level_ < 0) {
    entry_point_ = node;
    max_level_ = level;
    return;
  }
  std::span<const float> query = entries_[node].vector;
  uint32_t ep = entry_point_;
  for (int l = max_level_; l > level; --l) {
    ep = SearchLayer(query, ep, 1, l).front().second;
  }
  for (int l = std::min(level, max_level_); l >= 0; --l) {
    std::vector<Scored> found =
        SearchLayer(query, ep, static_cast<size_t>(params_.ef_construction), l);
    ep = found.front().second;
    const size_t max_links = static_cast<size_t>(l == 0 ? 2 * params_.m : params_.m);
    links_[node][l] = SelectNeighbors(found, static_cast<size_t>(params_.m));
    for (uint32_t neighbor : links_[node][l]) {
      std::vector<uint32_t>& back = links_[neighbor][l];
      back.push_back(node);
      if (back.size() > max_links) {
        std::vector<Scored> scored;
        scored.reserve(back.size());
        for (uint32_t b : back) scored.emplace_back(Distance(neighbor, b), b);
        std::sort(scored.begin(), scored.end());
        back = SelectNeighbors(std::move(scored), max_links);
      }
    }
  }
  if (level > max_level_) {
    max_level_ = level;
    entry_point_ = node;
  }
}

std::vector<uint32_t> RetrievalIndex::SelectNeighbors(
    std::vector<Scored> candidates, size_t m) const {
  // Diversity heuristic: keep a candidate only if it is closer to the base
  // than to every neighbor already kept; top up with the pruned ones.
  std::vector<uint32_t> kept;
  std::vector<uint32_t> pruned;
  for (const auto& [dist, id] : candidates) {
    if (kept.size() >= m) break;
    bool good = true;
    for (uint32_t k : kept) {
      if (Distance(id, k) < dist) {
        good = false;
        break;
      }
    }
    (good ? kept : pruned).push_back(id);
  }
  for (size_t i = 0; i < pruned.size() && kept.size() < m; ++i) {
    kept.push_back(pruned[i]);
  }
  return kept;
}

std::vector<Scored> RetrievalIndex::SearchLayer(std::span<const float> query,
                                                uint32_t entry, size_t ef,
                                                int level) const {
  std::vector<uint8_t> visited(entries_.size(), 0);
  std::priority_queue<Scored, std::vector<Scored>, CloserFirst> candidates;
  std::priority_queue<Scored, std::vector<Scored>, FartherFirst> best;
  Scored start{SquaredL2(query, entries_[entry].vector), entry};
  visited[entry] = 1;
  candidates.push(start);
  best.push(start);
  while (!candidates.empty()) {
    Scored current = candidates.top();
    if (current.first > best.top().first && best.size() >= ef) break;
    candidates.pop();
    const auto& node_links = links_[current.second];
    if (level >= static_cast<int>(node_links.size())) continue;
    for (uint32_t next : node_links[level]) {
      if (visited[next]) continue;
      visited[next] = 1;
      Scored s{SquaredL2(query, entries_[next].vector), next};
      if (best.size() < ef || s < best.top()) {
        candidates.push(s);
        best.push(s);
        if (best.size() > ef) best.pop();
      }
    }
  }
  std::vector<Scored> out;
  out.reserve(best.size());
  while (!best.empty()) {
    out.push_back(best.top());
    best.pop();
  }
  std::reverse(out.begin(), out.end());
  return out;
}

std::vector<RetrievalHit> RetrievalIndex::ToHits(std::vector<Scored> scored,
                                                 size_t k) const {
  auto by_distance_then_id = [this](const Scored& a, const Scored& b) {
    if (a.first != b.first) return a.first < b.first;
    return entries_[a.second].id < entries_[b.second].id;
  };
  if (scored.size() > k) {
    std::partial_sort(scored.begin(), scored.begin() + k, scored.end(),
                      by_distance_then_id);
    scored.resize(k);
  } else {
    std::sort(scored.begin(), scored.end(), by_distance_then_id);
  }
  std::vector<RetrievalHit> hits;
  hits.reserve(scored.size());
  for (size_t i = 0; i < scored.size(); ++i) {
    const IndexEntry& e = entries_[scored[i].second];
    hits.push_back({e.id, e.source_id, scored[i].first, static_cast<int>(i + 1)});
  }
  return hits;
}

absl::Status RetrievalIndex::CheckQuery(std::span<const float> query,
                                        size_t k) const {
  if (k < 1 || k > entries_.size()) {
    return absl::OutOfRangeError(
        absl::StrCat("k=", k, " outside [1, ", entries_.size(), "]"));
  }
  if (query.size() != dimension_) {
    return absl::InvalidArgumentError(absl::StrCat(
        "query dimension ", query.size(), " != index dimension ", dimension_));
  }
  return absl::OkStatus();
}

absl::StatusOr<std::vector<RetrievalHit>> RetrievalIndex::SearchExhaustive(
    std::span<const float> query, size_t k) const {
  RAGAUDIT_RETURN_IF_ERROR(CheckQuery(query, k));
  std::vector<Scored> scored;
  scored.reserve(entries_.size());
  for (uint32_t i = 0; i < entries_.size(); ++i) {
    scored.emplace_back(SquaredL2(query, entries_[i].vector), i);
  }
  return ToHits(std::move(scored), k);
}

absl::StatusOr<std::vector<RetrievalHit>> RetrievalIndex::SearchVector(
    std::span<const float> query, size_t k) const {
  if (kind_ == IndexKind::kBruteForce) return SearchExhaustive(query, k);
  RAGAUDIT_RETURN_IF_ERROR(CheckQuery(query, k));
  uint32_t ep = entry_point_;
  for (int l = max_level_; l > 0; --l) {
    ep = SearchLayer(query, ep, 1, l).front().second;
  }
  size_t ef = std::max(static_cast<size_t>(params_.ef_search), k);
  return ToHits(SearchLayer(query, ep, ef, 0), k);
}

std::string RetrievalIndex::Serialize() const {
  ByteWriter w;
  w.Bytes(kMagic, sizeof kMagic);
  w.U32(kFormatVersion);
  w.U32(kind_ == IndexKind::kHnsw ? 1 : 0);
  w.U64(dimension_);
  w.I32(params_.m);
  w.I32(params_.ef_construction);
  w.I32(params_.ef_search);
  w.U64(params_.seed);
  w.U64(entries_.size());
  for (const IndexEntry& e : entries_) {
    w.Str(e.id);
    w.Str(e.source_id);
    for (float x : e.vector) w.F32(x);
    w.Str(e.text);
  }
  if (kind_ == IndexKind::kHnsw) {
    w.I32(max_level_);
    w.U32(entry_point_);
    for (const auto& levels : links_) {
      w.U32(static_cast<uint32_t>(levels.size()));
      for (const auto& neighbors : levels) {
        w.U32(static_cast<uint32_t>(neighbors.size()));
        for (uint32_t nb : neighbors) w.U32(nb);
      }
    }
  }
  return w.Take();
}

absl::StatusOr<RetrievalIndex> RetrievalIndex::Deserialize(
    std::string_view bytes) {
  auto corrupt = [](std::string_view what) {
    return absl::DataLossError(absl::StrCat("corrupt index image: ", std::string(what)));
  };
  ByteReader r(bytes);
  char magic[4];
  if (!r.Bytes(magic, 4) || std::memcmp(magic, kMagic, 4) != 0) {
    return corrupt("bad magic");
  }
  uint32_t version, kind;
  uint64_t dim, count;
  HnswParams params;
  if (!r.U32(&version) || version != kFormatVersion) {
    return corrupt("unsupported version");
  }
  if (!r.U32(&kind) || kind > 1 || !r.U64(&dim) || !r.I32(&params.m) ||
      !r.I32(&params.ef_construction) || !r.I32(&params.ef_search) ||
      !r.U64(&params.seed) || !r.U64(&count)) {
    return corrupt("truncated header");
  }
  std::vector<IndexEntry> entries;
  for (uint64_t i = 0; i < count; ++i) {
    IndexEntry e;
    if (!r.Str(&e.id) || !r.Str(&e.source_id)) return corrupt("truncated entry");
    e.vector.resize(dim);
    for (float& x : e.vector) {
      if (!r.F32(&x)) return corrupt("truncated vector");
    }
    if (!r.Str(&e.text)) return corrupt("truncated entry text");
    entries.push_back(std::move(e));
  }

  // Rebuilding through FromEntries re-validates ids and vectors. The stored
  // graph then replaces the rebuilt one so images from other builds load
  // exactly as written.
  RAGAUDIT_ASSIGN_OR_RETURN(
      RetrievalIndex index,
      FromEntries(std::move(entries), dim, IndexKind::kBruteForce, params));
  if (kind == 1) {
    index.kind_ = IndexKind::kHnsw;
    uint32_t ep;
    if (!r.I32(&index.max_level_) || !r.U32(&ep)) return corrupt("truncated graph");
    if (ep >= count) return corrupt("entry point out of range");
    index.entry_point_ = ep;
    index.links_.resize(count);
    for (auto& levels : index.links_) {
      uint32_t nlevels;
      if (!r.U32(&nlevels) || nlevels == 0 ||
          static_cast<int>(nlevels) > index.max_level_ + 1) {
        return corrupt("bad level count");
      }
      levels.resize(nlevels);
      for (auto& neighbors : levels) {
        uint32_t nn;
        if (!r.U32(&nn) || nn > count) return corrupt("bad neighbor count");
        neighbors.resize(nn);
        for (uint32_t& nb : neighbors) {
          if (!r.U32(&nb) || nb >= count) return corrupt("bad neighbor id");
        }
      }
    }
  }
  if (!r.AtEnd()) return corrupt("trailing bytes");
  return index;
}

absl::StatusOr<std::vector<RetrievalHit>> Search(const RetrievalIndex& index,
                                                 std::string_view query_text,
                                                 const Embedder& embedder,
                                                 size_t k) {
  if (k < 1 || k > index.size()) {
    return absl::OutOfRangeError(
        absl::StrCat("k=", k, " outside [1, ", index.size(), "]"));
  }
  RAGAUDIT_ASSIGN_OR_RETURN(EmbeddingVector query, embedder.Embed(query_text));
  return index.SearchVector(query, k);
}

absl::StatusOr<RetrievalMatch> RetrievalMatchRate(
    const RetrievalIndex& index, const std::vector<TargetSample>& samples,
    const std::function<std::string(const TargetSample&)>& prompt_builder,
    const Embedder& embedder, size_t k) {
  RetrievalMatch match;
  match.total_count = samples.size();
  for (const TargetSample& sample : samples) {
    RAGAUDIT_ASSIGN_OR_RETURN(
        std::vector<RetrievalHit> hits,
        Search(index, prompt_builder(sample), embedder, k));
    for (const RetrievalHit& hit : hits) {
      if (hit.source_id == sample.source_id) {
        ++match.equal_count;
        break;
      }
    }
  }
  match.equal_percent =
      match.total_count == 0
          ? 0.0
          : 100.0 * static_cast<double>(match.equal_count) /
                static_cast<double>(match.total_count);
  return match;
}

}  // namespace ragaudit
