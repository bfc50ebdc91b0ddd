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

// Experiment configuration: a YAML file, validated as a whole so that every
// problem is reported at once.

#ifndef RAGAUDIT_CONFIG_H_
#define RAGAUDIT_CONFIG_H_

#include <array>
#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "absl/status/statusor.h"
#include "json.hpp"
#include "ragaudit/attack.h"
#include "ragaudit/attack_model.h"
#include "ragaudit/corpus.h"
#include "ragaudit/protocol.h"
#include "ragaudit/rag.h"
#include "ragaudit/retrieval.h"
#include "ragaudit/sim_generator.h"
#include "ragaudit/synthetic_corpus.h"

namespace ragaudit {

enum class Mode { kBlackbox, kGraybox };

std::string_view ModeName(Mode mode);
absl::StatusOr<Mode> ParseMode(std::string_view name);

struct CorpusConfig {
  // Label used in cell keys and reports.
  std::string dataset = "dataset";
  // Empty path: synthesize a corpus instead.
  std::string path;
  CorpusFormat format = CorpusFormat::kJsonl;
  DatasetKind kind = DatasetKind::kGeneric;
  SyntheticCorpusOptions synthetic;
  TargetOptions target;
};

struct SplitConfig {
  // Unset: 80% of the corpus, rounded down.
  std::optional<size_t> member_count;
  uint64_t seed = 0;
};

struct RetrievalConfig {
  size_t k = 4;
  BuildOptions build;
};

struct EmbedderConfig {
  // "sim" or "http".
  std::string backend = "sim";
  size_t dimension = 384;
  std::string endpoint;
  std::string api_key;
  int timeout_ms = 60000;
};

struct GeneratorConfig {
  // "sim", "http" or "cassette".
  std::string backend = "sim";
  // Backend label in cell keys; defaults to the backend kind.
  std::string name;
  std::string endpoint;
  std::string path = "/generate";
  // "neutral" or "openai".
  std::string protocol = "neutral";
  std::string model;
  std::string api_key;
  bool supports_logprobs = false;
  int max_in_flight = 4;
  int timeout_ms = 60000;
  int max_attempts = 3;
  int max_tokens = 32;
  // Record responses of the http backend here, or replay them with the
  // cassette backend.
  std::string cassette;
  SimGeneratorConfig sim;
};

struct AttackConfig {
  std::vector<int> format_ids = {0, 1, 2, 3, 4};
  std::vector<Mode> modes = {Mode::kBlackbox};
  FeatureOptions features;
  size_t ensemble_size = 40;
  uint64_t ensemble_seed = 0;
  std::array<bool, kNumFeatures> feature_mask{true, true, true, true};
};

struct ExperimentConfig {
  uint64_t seed = 0;
  CorpusConfig corpus;
  SplitConfig split;
  RetrievalConfig retrieval;
  EmbedderConfig embedder;
  GeneratorConfig generator;
  std::vector<TemplateKind> templates = {TemplateKind::kPlain};
  // Optional template files overriding the built-in bodies.
  std::map<TemplateKind, std::string> template_files;
  AttackConfig attack;
  ProtocolConfig protocol;
  std::string output_dir = "out";
  // Write one audit-log line per query.
  bool audit_log = true;
};

// Parses YAML text. Unknown keys and type errors are collected with the
// rest of the validation errors. `seed_override` replaces the top-level seed
// before the per-section seeds take their defaults from it.
absl::StatusOr<ExperimentConfig> ParseConfig(
    const std::string& yaml_text, std::vector<std::string>* errors,
    std::optional<uint64_t> seed_override = std::nullopt);

// Applies RAGAUDIT_EMBEDDER_ENDPOINT, RAGAUDIT_EMBEDDER_API_KEY,
// RAGAUDIT_GENERATOR_ENDPOINT and RAGAUDIT_GENERATOR_API_KEY. Nothing else
// can be overridden from the environment.
void ApplyEnvironmentOverrides(ExperimentConfig& config);

// Cross-field checks. Returns every violation found.
std::vector<std::string> ValidateConfig(const ExperimentConfig& config);

// Reads, parses, applies the environment and validates. On failure the
// status message lists every error, one per line.
absl::StatusOr<ExperimentConfig> LoadConfig(
    const std::string& path,
    std::optional<uint64_t> seed_override = std::nullopt);

// Canonical JSON of everything that influences results. Credentials and the
// output directory are excluded.
nlohmann::json ConfigToJson(const ExperimentConfig& config);
std::string ConfigHash(const ExperimentConfig& config);

}  // namespace ragaudit

#endif  // RAGAUDIT_CONFIG_H_
