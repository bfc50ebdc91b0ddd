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

#include "ragaudit/config.h"

#include <cstdlib>
#include <filesystem>
#include <set>
#include <utility>

#include "absl/strings/str_cat.h"
#include "absl/strings/str_join.h"
#include "ragaudit/util.h"
#include "yaml-cpp/yaml.h"

namespace ragaudit {
namespace {

using nlohmann::json;

template <typename T>
const char* TypeName() {
  if constexpr (std::is_same_v<T, bool>) return "a boolean";
  if constexpr (std::is_same_v<T, std::string>) return "a string";
  if constexpr (std::is_floating_point_v<T>) return "a number";
  if constexpr (std::is_integral_v<T>) return "an integer";
  return "a value";
}

// Walks one YAML mapping, recording type errors and, on Finish(), any keys
// that were never read.
class Section {
 public:
  Section(YAML::Node node, std::string path, std::vector<std::string>* errors)
      : node_(std::move(node)), path_(std::move(path)), errors_(errors) {
    if (node_ && !node_.IsNull() && !node_.IsMap()) {
      Error("", "expected a mapping");
      node_ = YAML::Node();
    }
  }

  bool Has(const char* key) const { return node_ && node_[key]; }

  template <typename T>
  bool Get(const char* key, T& out) {
    seen_.insert(key);
    if (!Has(key)) return false;
    try {
      if constexpr (std::is_integral_v<T> && !std::is_same_v<T, bool>) {
        // yaml-cpp happily wraps "-1" into an unsigned; reject it.
        if constexpr (std::is_unsigned_v<T>) {
          if (node_[key].template as<long long>() < 0) {
            Error(key, "must not be negative");
            return false;
          }
        }
      }
      out = node_[key].template as<T>();
      return true;
    } catch (const YAML::Exception&) {
      Error(key, absl::StrCat("expected ", TypeName<T>()));
      return false;
    }
  }

  template <typename T>
  bool GetList(const char* key, std::vector<T>& out) {
    seen_.insert(key);
    if (!Has(key)) return false;
    const YAML::Node n = node_[key];
    if (!n.IsSequence()) {
      Error(key, "expected a list");
      return false;
    }
    std::vector<T> values;
    try {
      for (const YAML::Node& item : n) values.push_back(item.as<T>());
    } catch (const YAML::Exception&) {
      Error(key, absl::StrCat("expected a list of ", TypeName<T>(), "s"));
      return false;
    }
    out = std::move(values);
    return true;
  }

  // Parses a string field with `parse`, which returns StatusOr<E>.
  template <typename E, typename Parse>
  void GetEnum(const char* key, E& out, Parse parse) {
    std::string name;
    if (!Get(key, name)) return;
    auto parsed = parse(name);
    if (!parsed.ok()) {
      Error(key, std::string(parsed.status().message()));
      return;
    }
    out = *parsed;
  }

  // Probability pair [p_lo, p_hi] stored as a log-prob range.
  void GetProbRange(const char* key, LogProbRange& out) {
    std::vector<double> v;
    if (!GetList(key, v)) return;
    if (v.size() != 2 || !(v[0] > 0.0) || !(v[1] <= 1.0) || v[0] > v[1]) {
      Error(key, "expected [p_lo, p_hi] with 0 < p_lo <= p_hi <= 1");
      return;
    }
    out = LogProbRange::OfProbabilities(v[0], v[1]);
  }

  Section Child(const char* key) {
    seen_.insert(key);
    return Section(Has(key) ? node_[key] : YAML::Node(), Join(key), errors_);
  }

  YAML::Node Raw(const char* key) {
    seen_.insert(key);
    return Has(key) ? node_[key] : YAML::Node();
  }

  void Finish() {
    if (!node_ || !node_.IsMap()) return;
    for (const auto& kv : node_) {
      const std::string key = kv.first.as<std::string>();
      if (!seen_.count(key)) Error(key, "unknown key");
    }
  }

  void Error(const std::string& key, const std::string& what) {
    errors_->push_back(absl::StrCat(key.empty() ? path_ : Join(key), ": ", what));
  }

  const std::string& path() const { return path_; }

 private:
  std::string Join(const std::string& key) const {
    return path_.empty() ? key : absl::StrCat(path_, ".", key);
  }

  YAML::Node node_;
  std::string path_;
  std::vector<std::string>* errors_;
  std::set<std::string> seen_;
};

json RangeToJson(const LogProbRange& r) { return json::array({r.lo, r.hi}); }

bool FileExists(const std::string& path) {
  std::error_code ec;
  return std::filesystem::exists(path, ec);
}

}  // namespace

std::string_view ModeName(Mode mode) {
  return mode == Mode::kGraybox ? "graybox" : "blackbox";
}

absl::StatusOr<Mode> ParseMode(std::string_view name) {
  if (name == "blackbox") return Mode::kBlackbox;
  if (name == "graybox") return Mode::kGraybox;
  return absl::InvalidArgumentError(
      absl::StrCat("unknown mode \"", std::string(name), "\""));
}

absl::StatusOr<ExperimentConfig> ParseConfig(
    const std::string& yaml_text, std::vector<std::string>* errors,
    std::optional<uint64_t> seed_override) {
  YAML::Node root;
  try {
    root = YAML::Load(yaml_text);
  } catch (const YAML::Exception& e) {
    return absl::InvalidArgumentError(absl::StrCat("config: ", e.what()));
  }
  if (seed_override.has_value()) {
    if (root.IsNull()) root = YAML::Node(YAML::NodeType::Map);
    if (root.IsMap()) root["seed"] = *seed_override;
  }
  ExperimentConfig c;
  Section top(root, "", errors);
  top.Get("seed", c.seed);
  c.split.seed = c.seed;
  c.protocol.seed = c.seed;
  c.attack.ensemble_seed = c.seed;
  top.Get("output_dir", c.output_dir);
  top.Get("audit_log", c.audit_log);

  {
    Section s = top.Child("corpus");
    s.Get("dataset", c.corpus.dataset);
    s.Get("path", c.corpus.path);
    s.GetEnum("format", c.corpus.format, ParseCorpusFormat);
    s.GetEnum("kind", c.corpus.kind, ParseDatasetKind);
    s.Get("email_max_chars", c.corpus.target.email_max_chars);
    s.GetList("human_markers", c.corpus.target.markers.human);
    s.GetList("other_markers", c.corpus.target.markers.other);
    s.Get("all_human_turns", c.corpus.target.markers.all_human_turns);
    Section syn = s.Child("synthetic");
    c.corpus.synthetic.seed = c.seed;
    syn.Get("count", c.corpus.synthetic.count);
    syn.GetEnum("kind", c.corpus.synthetic.kind, ParseDatasetKind);
    syn.Get("seed", c.corpus.synthetic.seed);
    syn.Get("min_words", c.corpus.synthetic.min_words);
    syn.Get("max_words", c.corpus.synthetic.max_words);
    syn.Get("vocabulary_size", c.corpus.synthetic.vocabulary_size);
    syn.Finish();
    s.Finish();
  }
  {
    Section s = top.Child("split");
    size_t members = 0;
    if (s.Get("member_count", members)) c.split.member_count = members;
    s.Get("seed", c.split.seed);
    s.Finish();
  }
  {
    Section s = top.Child("retrieval");
    s.Get("k", c.retrieval.k);
    s.GetEnum("index_kind", c.retrieval.build.kind, ParseIndexKind);
    s.Get("chunk_chars", c.retrieval.build.chunk_chars);
    s.Get("chunk_overlap", c.retrieval.build.chunk_overlap);
    Section h = s.Child("hnsw");
    h.Get("m", c.retrieval.build.hnsw.m);
    h.Get("ef_construction", c.retrieval.build.hnsw.ef_construction);
    h.Get("ef_search", c.retrieval.build.hnsw.ef_search);
    h.Get("seed", c.retrieval.build.hnsw.seed);
    h.Finish();
    s.Finish();
  }
  {
    Section s = top.Child("embedder");
    s.Get("backend", c.embedder.backend);
    s.Get("dimension", c.embedder.dimension);
    s.Get("endpoint", c.embedder.endpoint);
    s.Get("timeout_ms", c.embedder.timeout_ms);
    if (s.Has("api_key")) {
      s.Error("api_key", "credentials come from the environment only");
    }
    s.Raw("api_key");
    s.Finish();
  }
  {
    GeneratorConfig& g = c.generator;
    Section s = top.Child("generator");
    s.Get("backend", g.backend);
    s.Get("name", g.name);
    s.Get("endpoint", g.endpoint);
    s.Get("path", g.path);
    s.Get("protocol", g.protocol);
    s.Get("model", g.model);
    s.Get("supports_logprobs", g.supports_logprobs);
    s.Get("max_in_flight", g.max_in_flight);
    s.Get("timeout_ms", g.timeout_ms);
    s.Get("max_attempts", g.max_attempts);
    s.Get("max_tokens", g.max_tokens);
    s.Get("cassette", g.cassette);
    if (s.Has("api_key")) {
      s.Error("api_key", "credentials come from the environment only");
    }
    s.Raw("api_key");
    Section sim = s.Child("sim");
    g.sim.rng_seed = c.seed;
    sim.Get("grounding_fidelity", g.sim.grounding_fidelity);
    sim.Get("defense_compliance", g.sim.defense_compliance);
    sim.Get("rng_seed", g.sim.rng_seed);
    sim.GetProbRange("member_yes", g.sim.member_yes);
    sim.GetProbRange("nonmember_no", g.sim.nonmember_no);
    sim.GetProbRange("ungrounded", g.sim.ungrounded);
    sim.GetProbRange("refusal", g.sim.refusal);
    sim.Finish();
    s.Finish();
  }
  {
    std::vector<std::string> names;
    if (top.GetList("templates", names)) {
      c.templates.clear();
      for (const std::string& n : names) {
        auto kind = ParseTemplateKind(n);
        if (kind.ok()) {
          c.templates.push_back(*kind);
        } else {
          top.Error("templates", std::string(kind.status().message()));
        }
      }
    }
    YAML::Node files = top.Raw("template_files");
    if (files && files.IsMap()) {
      for (const auto& kv : files) {
        const std::string name = kv.first.as<std::string>();
        auto kind = ParseTemplateKind(name);
        if (!kind.ok()) {
          top.Error("template_files", std::string(kind.status().message()));
          continue;
        }
        try {
          c.template_files[*kind] = kv.second.as<std::string>();
        } catch (const YAML::Exception&) {
          top.Error(absl::StrCat("template_files.", name), "expected a string");
        }
      }
    } else if (files && !files.IsNull()) {
      top.Error("template_files", "expected a mapping");
    }
  }
  {
    Section s = top.Child("attack");
    s.GetList("format_ids", c.attack.format_ids);
    auto set_modes = [&](const std::vector<std::string>& names,
                         const char* key) {
      c.attack.modes.clear();
      for (const std::string& n : names) {
        auto m = ParseMode(n);
        if (m.ok()) {
          c.attack.modes.push_back(*m);
        } else {
          s.Error(key, std::string(m.status().message()));
        }
      }
    };
    std::string mode;
    std::vector<std::string> modes;
    if (s.Get("mode", mode)) set_modes({mode}, "mode");
    if (s.GetList("modes", modes)) set_modes(modes, "modes");
    s.Get("ensemble_size", c.attack.ensemble_size);
    s.Get("ensemble_seed", c.attack.ensemble_seed);
    s.Get("missing_probability", c.attack.features.missing_probability);
    s.Get("clamp", c.attack.features.clamp);
    std::string scaling;
    if (s.Get("class_scaling", scaling)) {
      if (scaling == "signed_logit") {
        c.attack.features.class_scaling = ClassScaling::kSignedLogit;
      } else if (scaling == "complement_ratio") {
        c.attack.features.class_scaling = ClassScaling::kComplementRatio;
      } else {
        s.Error("class_scaling",
                "expected \"signed_logit\" or \"complement_ratio\"");
      }
    }
    std::vector<bool> mask;
    if (s.GetList("feature_mask", mask)) {
      if (mask.size() != kNumFeatures) {
        s.Error("feature_mask", absl::StrCat("expected ", kNumFeatures,
                                             " booleans"));
      } else {
        for (size_t i = 0; i < kNumFeatures; ++i) c.attack.feature_mask[i] = mask[i];
      }
    }
    s.Finish();
  }
  {
    ProtocolConfig& p = c.protocol;
    Section s = top.Child("protocol");
    s.Get("eval_pool_members", p.eval_pool_members);
    s.Get("eval_pool_non_members", p.eval_pool_non_members);
    s.Get("runs", p.runs);
    s.Get("per_run_members", p.per_run_members);
    s.Get("per_run_non_members", p.per_run_non_members);
    s.Get("seed", p.seed);
    s.Get("train_members", p.train_members);
    s.Get("train_non_members", p.train_non_members);
    s.Get("threads", p.threads);
    s.Finish();
  }
  top.Finish();
  return c;
}

void ApplyEnvironmentOverrides(ExperimentConfig& config) {
  auto env = [](const char* name, std::string& out) {
    if (const char* v = std::getenv(name); v != nullptr && *v != '\0') out = v;
  };
  env("RAGAUDIT_EMBEDDER_ENDPOINT", config.embedder.endpoint);
  env("RAGAUDIT_EMBEDDER_API_KEY", config.embedder.api_key);
  env("RAGAUDIT_GENERATOR_ENDPOINT", config.generator.endpoint);
  env("RAGAUDIT_GENERATOR_API_KEY", config.generator.api_key);
}

std::vector<std::string> ValidateConfig(const ExperimentConfig& c) {
  std::vector<std::string> errors;
  auto fail = [&](std::string e) { errors.push_back(std::move(e)); };

  if (c.corpus.dataset.empty()) fail("corpus.dataset: must not be empty");
  if (!c.corpus.path.empty() && !FileExists(c.corpus.path)) {
    fail(absl::StrCat("corpus.path: ", c.corpus.path, " does not exist"));
  }
  if (c.corpus.path.empty()) {
    const SyntheticCorpusOptions& s = c.corpus.synthetic;
    if (s.count == 0) fail("corpus.synthetic.count: must be positive");
    if (s.min_words == 0 || s.min_words > s.max_words) {
      fail("corpus.synthetic: need 0 < min_words <= max_words");
    }
    if (s.vocabulary_size == 0) {
      fail("corpus.synthetic.vocabulary_size: must be positive");
    }
    const size_t members =
        c.split.member_count.value_or(s.count * 8 / 10);
    if (members > s.count) {
      fail(absl::StrCat("split.member_count: ", members, " exceeds the ",
                        s.count, " synthetic documents"));
    } else {
      if (c.protocol.eval_pool_members > members) {
        fail(absl::StrCat("protocol.eval_pool_members: ",
                          c.protocol.eval_pool_members, " exceeds the ",
                          members, " members"));
      }
      if (c.protocol.eval_pool_non_members > s.count - members) {
        fail(absl::StrCat("protocol.eval_pool_non_members: ",
                          c.protocol.eval_pool_non_members, " exceeds the ",
                          s.count - members, " non-members"));
      }
    }
  }
  if (c.corpus.target.email_max_chars == 0) {
    fail("corpus.email_max_chars: must be positive");
  }
  if (c.corpus.target.markers.human.empty()) {
    fail("corpus.human_markers: must not be empty");
  }

  if (c.retrieval.k < 1) fail("retrieval.k: must be at least 1");
  const HnswParams& h = c.retrieval.build.hnsw;
  if (h.m < 2) fail("retrieval.hnsw.m: must be at least 2");
  if (h.ef_construction < 1 || h.ef_search < 1) {
    fail("retrieval.hnsw: ef values must be positive");
  }
  if (c.retrieval.build.chunk_chars > 0 &&
      c.retrieval.build.chunk_overlap >= c.retrieval.build.chunk_chars) {
    fail("retrieval.chunk_overlap: must be smaller than chunk_chars");
  }

  if (c.embedder.backend == "http") {
    if (c.embedder.endpoint.empty()) fail("embedder.endpoint: required for http");
  } else if (c.embedder.backend == "sim") {
    if (c.embedder.dimension == 0) fail("embedder.dimension: must be positive");
  } else {
    fail(absl::StrCat("embedder.backend: unknown backend \"",
                      c.embedder.backend, "\""));
  }

  const GeneratorConfig& g = c.generator;
  bool logprobs = g.supports_logprobs;
  if (g.backend == "sim") {
    logprobs = true;
    if (absl::Status s = ValidateSimGeneratorConfig(g.sim); !s.ok()) {
      fail(absl::StrCat("generator.sim: ", s.message()));
    }
  } else if (g.backend == "http") {
    if (g.endpoint.empty()) fail("generator.endpoint: required for http");
    if (g.protocol != "neutral" && g.protocol != "openai") {
      fail(absl::StrCat("generator.protocol: unknown protocol \"", g.protocol,
                        "\""));
    }
  } else if (g.backend == "cassette") {
    if (g.cassette.empty()) {
      fail("generator.cassette: required for the cassette backend");
    } else if (!FileExists(g.cassette)) {
      fail(absl::StrCat("generator.cassette: ", g.cassette,
                        " does not exist"));
    }
  } else {
    fail(absl::StrCat("generator.backend: unknown backend \"", g.backend,
                      "\""));
  }
  if (g.max_in_flight < 1) fail("generator.max_in_flight: must be positive");
  if (g.max_attempts < 1) fail("generator.max_attempts: must be positive");
  if (g.max_tokens < 1) fail("generator.max_tokens: must be positive");
  if (g.timeout_ms < 1) fail("generator.timeout_ms: must be positive");

  if (c.templates.empty()) fail("templates: must not be empty");
  for (const auto& [kind, path] : c.template_files) {
    if (!FileExists(path)) {
      fail(absl::StrCat("template_files.", std::string(TemplateKindName(kind)),
                        ": ", path,
                        " does not exist"));
    }
  }

  if (c.attack.format_ids.empty()) fail("attack.format_ids: must not be empty");
  for (int id : c.attack.format_ids) {
    if (id < 0 || id >= kNumAttackFormats) {
      fail(absl::StrCat("attack.format_ids: unknown attack prompt format ", id));
    }
  }
  if (c.attack.modes.empty()) fail("attack.modes: must not be empty");
  bool graybox = false;
  for (Mode m : c.attack.modes) graybox |= m == Mode::kGraybox;
  if (graybox && !logprobs) fail("gray-box requires token log-probabilities");
  if (c.attack.ensemble_size < 1) fail("attack.ensemble_size: must be positive");
  if (!(c.attack.features.missing_probability > 0.0 &&
        c.attack.features.missing_probability < 1.0)) {
    fail("attack.missing_probability: must be in (0, 1)");
  }
  if (!(c.attack.features.clamp > 0.0 && c.attack.features.clamp < 0.5)) {
    fail("attack.clamp: must be in (0, 0.5)");
  }
  bool any_feature = false;
  for (bool b : c.attack.feature_mask) any_feature |= b;
  if (!any_feature) fail("attack.feature_mask: at least one feature required");

  ProtocolConfig p = c.protocol;
  p.graybox = graybox;
  if (absl::Status s = ValidateProtocolConfig(p); !s.ok()) {
    fail(absl::StrCat("protocol: ", s.message()));
  }
  if (p.threads < 1) fail("protocol.threads: must be positive");
  if (c.output_dir.empty()) fail("output_dir: must not be empty");
  return errors;
}

absl::StatusOr<ExperimentConfig> LoadConfig(
    const std::string& path, std::optional<uint64_t> seed_override) {
  std::string text;
  if (!ReadFileToString(path, &text)) {
    return absl::NotFoundError(absl::StrCat("cannot read config ", path));
  }
  std::vector<std::string> errors;
  auto config = ParseConfig(text, &errors, seed_override);
  if (!config.ok()) return config.status();
  ApplyEnvironmentOverrides(*config);
  std::vector<std::string> more = ValidateConfig(*config);
  errors.insert(errors.end(), more.begin(), more.end());
  if (!errors.empty()) {
    return absl::InvalidArgumentError(absl::StrJoin(errors, "\n"));
  }
  return config;
}

json ConfigToJson(const ExperimentConfig& c) {
  json j;
  j["seed"] = c.seed;
  const SyntheticCorpusOptions& syn = c.corpus.synthetic;
  j["corpus"] = {
      {"dataset", c.corpus.dataset},
      {"path", c.corpus.path},
      {"format", c.corpus.format == CorpusFormat::kJsonl  ? "jsonl"
                 : c.corpus.format == CorpusFormat::kCsv ? "csv"
                                                         : "plain_dir"},
      {"kind", std::string(DatasetKindName(c.corpus.kind))},
      {"email_max_chars", c.corpus.target.email_max_chars},
      {"human_markers", c.corpus.target.markers.human},
      {"other_markers", c.corpus.target.markers.other},
      {"all_human_turns", c.corpus.target.markers.all_human_turns},
      {"synthetic",
       {{"count", syn.count},
        {"kind", std::string(DatasetKindName(syn.kind))},
        {"seed", syn.seed},
        {"min_words", syn.min_words},
        {"max_words", syn.max_words},
        {"vocabulary_size", syn.vocabulary_size}}}};
  j["split"] = {{"member_count", c.split.member_count
                                     ? json(*c.split.member_count)
                                     : json(nullptr)},
                {"seed", c.split.seed}};
  const BuildOptions& b = c.retrieval.build;
  j["retrieval"] = {{"k", c.retrieval.k},
                    {"index_kind", std::string(IndexKindName(b.kind))},
                    {"chunk_chars", b.chunk_chars},
                    {"chunk_overlap", b.chunk_overlap},
                    {"hnsw",
                     {{"m", b.hnsw.m},
                      {"ef_construction", b.hnsw.ef_construction},
                      {"ef_search", b.hnsw.ef_search},
                      {"seed", b.hnsw.seed}}}};
  j["embedder"] = {{"backend", c.embedder.backend},
                   {"dimension", c.embedder.dimension},
                   {"endpoint", c.embedder.endpoint}};
  const GeneratorConfig& g = c.generator;
  j["generator"] = {{"backend", g.backend},
                    {"name", g.name},
                    {"endpoint", g.endpoint},
                    {"path", g.path},
                    {"protocol", g.protocol},
                    {"model", g.model},
                    {"supports_logprobs", g.supports_logprobs},
                    {"max_tokens", g.max_tokens},
                    {"cassette", g.cassette},
                    {"sim",
                     {{"grounding_fidelity", g.sim.grounding_fidelity},
                      {"defense_compliance", g.sim.defense_compliance},
                      {"rng_seed", g.sim.rng_seed},
                      {"member_yes", RangeToJson(g.sim.member_yes)},
                      {"nonmember_no", RangeToJson(g.sim.nonmember_no)},
                      {"ungrounded", RangeToJson(g.sim.ungrounded)},
                      {"refusal", RangeToJson(g.sim.refusal)}}}};
  json templates = json::array();
  for (TemplateKind k : c.templates) {
    templates.push_back(std::string(TemplateKindName(k)));
  }
  j["templates"] = std::move(templates);
  json files = json::object();
  for (const auto& [kind, path] : c.template_files) {
    std::string body;
    // Hash the file content, not just its name.
    files[std::string(TemplateKindName(kind))] =
        ReadFileToString(path, &body) ? Hex64(Fnv1a64(body)) : "unreadable";
  }
  j["template_files"] = std::move(files);
  json modes = json::array();
  for (Mode m : c.attack.modes) modes.push_back(std::string(ModeName(m)));
  j["attack"] = {
      {"format_ids", c.attack.format_ids},
      {"modes", std::move(modes)},
      {"ensemble_size", c.attack.ensemble_size},
      {"ensemble_seed", c.attack.ensemble_seed},
      {"missing_probability", c.attack.features.missing_probability},
      {"clamp", c.attack.features.clamp},
      {"class_scaling", c.attack.features.class_scaling ==
                                ClassScaling::kSignedLogit
                            ? "signed_logit"
                            : "complement_ratio"},
      {"feature_mask", c.attack.feature_mask}};
  const ProtocolConfig& p = c.protocol;
  j["protocol"] = {{"eval_pool_members", p.eval_pool_members},
                   {"eval_pool_non_members", p.eval_pool_non_members},
                   {"runs", p.runs},
                   {"per_run_members", p.per_run_members},
                   {"per_run_non_members", p.per_run_non_members},
                   {"seed", p.seed},
                   {"train_members", p.train_members},
                   {"train_non_members", p.train_non_members}};
  return j;
}

std::string ConfigHash(const ExperimentConfig& config) {
  return Hex64(Fnv1a64(ConfigToJson(config).dump()));
}

}  // namespace ragaudit
