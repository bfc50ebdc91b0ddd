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

#include "ragaudit/synthetic_corpus.h"

#include "absl/strings/str_cat.h"
#include "json.hpp"
#include "ragaudit/util.h"

namespace ragaudit {
namespace {

constexpr const char* kOnsets[] = {"b", "c",  "d",  "f",  "g",  "h",  "j",
                                   "k", "l",  "m",  "n",  "p",  "r",  "s",
                                   "t", "v",  "w",  "z",  "br", "ch", "st",
                                   "tr", "pl", "gr", "sh", "th", "cl"};
constexpr const char* kVowels[] = {"a", "e", "i", "o", "u", "ai", "ou", "ea"};

std::vector<std::string> BuildVocabulary(size_t size, Rng& rng) {
  std::vector<std::string> words;
  words.reserve(size);
  for (size_t i = 0; i < size; ++i) {
    size_t syllables = 1 + rng.Below(3);
    std::string w;
    for (size_t s = 0; s < syllables; ++s) {
      w += kOnsets[rng.Below(std::size(kOnsets))];
      w += kVowels[rng.Below(std::size(kVowels))];
    }
    if (rng.Bernoulli(0.4)) w += kOnsets[rng.Below(std::size(kOnsets))];
    words.push_back(std::move(w));
  }
  return words;
}

std::string Sentence(const std::vector<std::string>& vocab, size_t words,
                     Rng& rng) {
  std::string out;
  for (size_t i = 0; i < words; ++i) {
    std::string w = vocab[rng.Below(vocab.size())];
    if (i == 0 && !w.empty()) w[0] = static_cast<char>(w[0] - 'a' + 'A');
    if (i > 0) out.push_back(' ');
    out += w;
  }
  out.push_back('.');
  return out;
}

std::string Paragraph(const std::vector<std::string>& vocab, size_t words,
                      Rng& rng) {
  std::string out;
  while (words > 0) {
    size_t n = std::min<size_t>(words, 6 + rng.Below(10));
    if (!out.empty()) out.push_back(' ');
    out += Sentence(vocab, n, rng);
    words -= n;
  }
  return out;
}

}  // namespace

std::vector<Document> SynthesizeCorpus(const SyntheticCorpusOptions& options) {
  Rng rng(options.seed);
  std::vector<std::string> vocab =
      BuildVocabulary(std::max<size_t>(options.vocabulary_size, 16), rng);
  std::vector<Document> docs;
  docs.reserve(options.count);
  const size_t span = options.max_words > options.min_words
                          ? options.max_words - options.min_words + 1
                          : 1;
  for (size_t i = 0; i < options.count; ++i) {
    size_t words = options.min_words + rng.Below(span);
    Document doc;
    doc.kind = options.kind;
    switch (options.kind) {
      case DatasetKind::kEmail:
        doc.body = absl::StrCat("Subject: ", Sentence(vocab, 4, rng), "\n\n",
                                Paragraph(vocab, words, rng), "\n\n-- ",
                                vocab[rng.Below(vocab.size())]);
        break;
      case DatasetKind::kQaDialogue:
        doc.body = absl::StrCat("Patient: ", Paragraph(vocab, words, rng),
                                " Doctor: ",
                                Paragraph(vocab, words / 2 + 8, rng));
        break;
      case DatasetKind::kGeneric:
        doc.body = Paragraph(vocab, words, rng);
        break;
    }
    doc.id = absl::StrCat("syn-", options.seed, "-", i);
    docs.push_back(std::move(doc));
  }
  return docs;
}

std::string DocumentsToJsonl(const std::vector<Document>& docs) {
  std::string out;
  for (const Document& d : docs) {
    nlohmann::ordered_json j;
    j["id"] = d.id;
    j["body"] = d.body;
    j["kind"] = std::string(DatasetKindName(d.kind));
    out += j.dump();
    out.push_back('\n');
  }
  return out;
}

}  // namespace ragaudit
