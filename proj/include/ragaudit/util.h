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

// Small portable helpers shared by every module: stable hashing, a
// platform-independent random engine and UTF-8 character handling.

#ifndef RAGAUDIT_UTIL_H_
#define RAGAUDIT_UTIL_H_

#include <cstddef>
#include <cstdint>
#include <functional>
#include <string>
#include <string_view>
#include <vector>

namespace ragaudit {

// 64-bit FNV-1a. Stable across platforms and releases; used for content ids,
// request hashes and config hashes. Not a cryptographic hash.
uint64_t Fnv1a64(std::string_view data, uint64_t basis = 0xcbf29ce484222325ULL);

// Lower-case, zero-padded 16 character hex rendering of `value`.
std::string Hex64(uint64_t value);

// SplitMix64 finalizer. Used to derive independent seeds from (seed, salt).
uint64_t MixSeed(uint64_t seed, uint64_t salt);

// Deterministic random engine whose output sequence is identical on every
// standard library. The std distributions are implementation-defined, so all
// sampling used for reproducible experiments goes through this class.
class Rng {
 public:
  explicit Rng(uint64_t seed);

  uint64_t NextU64();
  // Uniform in [0, 1) with 53 bits of precision.
  double NextDouble();
  // Uniform integer in [0, bound). `bound` must be positive.
  uint64_t Below(uint64_t bound);
  // Uniform in [lo, hi].
  double Uniform(double lo, double hi);
  // True with probability `p`.
  bool Bernoulli(double p);

  // Fisher-Yates shuffle.
  template <typename T>
  void Shuffle(std::vector<T>& items) {
    for (size_t i = items.size(); i > 1; --i) {
      size_t j = static_cast<size_t>(Below(i));
      std::swap(items[i - 1], items[j]);
    }
  }

  // `count` distinct indices from [0, n), in draw order.
  std::vector<size_t> SampleIndices(size_t n, size_t count);

 private:
  uint64_t state_[4];
};

// Number of Unicode scalar values in a UTF-8 string. Invalid bytes count as
// one character each.
size_t Utf8Length(std::string_view text);

// Longest prefix of `text` containing at most `max_chars` characters. Never
// splits a multi-byte sequence.
std::string_view Utf8Prefix(std::string_view text, size_t max_chars);

// Splits on every occurrence of `sep`; n separators give n + 1 pieces.
std::vector<std::string_view> SplitString(std::string_view text, char sep);

// Strips ASCII whitespace from both ends.
std::string_view TrimWhitespace(std::string_view text);

// Runs fn(0) .. fn(n - 1) on up to `threads` workers. Each index runs exactly
// once; callers write results into per-index slots.
void ParallelFor(size_t n, size_t threads,
                 const std::function<void(size_t)>& fn);

// Reads a whole file. Returns false when it cannot be opened.
bool ReadFileToString(const std::string& path, std::string* out);

}  // namespace ragaudit

#endif  // RAGAUDIT_UTIL_H_
