// Copyright 2026 The detoxcorp Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "detox/config.hpp"

#include <cmath>
#include <fstream>
#include <sstream>

#include "detox/error.hpp"
#include "detox/hash.hpp"

namespace detox {

std::string_view to_string(GatingPolicy policy) {
  return policy == GatingPolicy::LlmVerdict ? "llm_verdict" : "conjunctive";
}

GatingPolicy gating_policy_from_string(std::string_view name) {
  if (name == "llm_verdict" || name == "llm-verdict" || name == "llm") return GatingPolicy::LlmVerdict;
  if (name == "conjunctive") return GatingPolicy::Conjunctive;
  throw ConfigError("unknown gating policy '" + std::string(name) + "'");
}

void SplitSpec::validate() const {
  if (!(train > 0 && val > 0 && test > 0)) throw ConfigError("split ratios must be positive");
  if (std::abs(train + val + test - 1.0) > 1e-9) throw ConfigError("split ratios must sum to 1");
}

namespace {

std::filesystem::path resolve(const std::filesystem::path& base, const std::string& p) {
  std::filesystem::path path(p);
  if (path.empty() || path.is_absolute() || base.empty()) return path;
  return base / path;
}

ModelParams merged_params(const ModelParams& base, const nlohmann::json& j, const char* task) {
  if (!j.contains("task_overrides") || !j["task_overrides"].contains(task)) return base;
  ModelParams p = base;
  const auto& o = j["task_overrides"][task];
  p.model_name = o.value("model_name", p.model_name);
  p.max_tokens = o.value("max_tokens", p.max_tokens);
  p.temperature = o.value("temperature", p.temperature);
  p.validate();
  return p;
}

std::string file_digest(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) return "missing:" + path.string();
  std::ostringstream buf;
  buf << in.rdbuf();
  return sha256_hex(buf.str());
}

nlohmann::json prompt_json(const PromptTemplate& t) {
  return {{"task", std::string(to_string(t.task()))},
          {"version", t.version()},
          {"system", t.system() ? nlohmann::json(*t.system()) : nlohmann::json(nullptr)},
          {"user", t.user_template()}};
}

}  // namespace

PipelineConfig PipelineConfig::from_json(const nlohmann::json& j,
                                         const std::filesystem::path& base_dir) {
  PipelineConfig c;
  try {
    c.seed = j.value("seed", c.seed);
    if (j.contains("sources")) {
      for (const auto& s : j["sources"]) {
        auto spec = s.get<ReaderSpec>();
        spec.path = resolve(base_dir, spec.path.string());
        c.sources.push_back(std::move(spec));
      }
    }
    if (j.contains("label_policy")) {
      for (const auto& [source, labels] : j["label_policy"].items()) {
        c.label_policy[source] = labels.get<std::set<std::string>>();
      }
    }
    ModelParams model;
    if (j.contains("model")) model = j["model"].get<ModelParams>();
    c.params.paraphrase = merged_params(model, j, "paraphrase");
    c.params.content_check = merged_params(model, j, "content_check");
    c.params.toxicity_check = merged_params(model, j, "toxicity_check");

    if (j.contains("prompts")) {
      const auto& p = j["prompts"];
      auto load_if = [&](const char* key, PromptTemplate& slot, TaskKind expected) {
        if (!p.contains(key)) return;
        auto t = PromptTemplate::load(resolve(base_dir, p[key].get<std::string>()));
        if (t.task() != expected) {
          throw ConfigError(std::string("prompt file for '") + key + "' declares task " +
                            std::string(to_string(t.task())));
        }
        slot = std::move(t);
      };
      load_if("paraphrase", c.prompts.paraphrase, TaskKind::Paraphrase);
      load_if("paraphrase_fallback", c.prompts.fallback, TaskKind::ParaphraseFallback);
      load_if("content_check", c.prompts.content_check, TaskKind::ContentCheck);
      load_if("toxicity_check", c.prompts.toxicity_check, TaskKind::ToxicityCheck);
    }
    if (j.contains("thresholds")) c.thresholds = j["thresholds"].get<ScoreThresholds>();
    if (j.contains("gating")) c.gating = gating_policy_from_string(j["gating"].get<std::string>());
    if (j.contains("split")) {
      const auto& s = j["split"];
      if (s.contains("ratios")) {
        const auto r = s["ratios"].get<std::vector<double>>();
        if (r.size() != 3) throw ConfigError("split.ratios needs three values");
        c.split.train = r[0];
        c.split.val = r[1];
        c.split.test = r[2];
      }
    }
    if (j.contains("pricing")) c.pricing = j["pricing"].get<Pricing>();
    if (j.contains("backend")) {
      const auto& b = j["backend"];
      for (const char* secret : {"api_key", "key", "token", "authorization"}) {
        if (b.contains(secret)) {
          throw ConfigError(std::string("backend.") + secret +
                            " is not accepted; the API key is read from DETOX_API_KEY");
        }
      }
      c.backend.kind = b.value("kind", c.backend.kind);
      c.backend.base_url = b.value("base_url", c.backend.base_url);
      if (b.contains("mock_script")) {
        c.backend.mock_script = resolve(base_dir, b["mock_script"].get<std::string>());
      }
      c.backend.max_attempts = b.value("max_attempts", c.backend.max_attempts);
      c.backend.base_delay_ms = b.value("base_delay_ms", c.backend.base_delay_ms);
      c.backend.jitter = b.value("jitter", c.backend.jitter);
      c.backend.rate_limit_per_second =
          b.value("rate_limit_per_second", c.backend.rate_limit_per_second);
      c.backend.cache = b.value("cache", c.backend.cache);
      if (b.contains("cache_path")) {
        c.backend.cache_path = resolve(base_dir, b["cache_path"].get<std::string>());
      }
      c.backend.timeout_seconds = b.value("timeout_seconds", c.backend.timeout_seconds);
    }
    if (j.contains("scorer")) {
      const auto& s = j["scorer"];
      c.scorer.kind = s.value("kind", c.scorer.kind);
      c.scorer.base_url = s.value("base_url", c.scorer.base_url);
      if (s.contains("mock_table")) {
        c.scorer.mock_table = resolve(base_dir, s["mock_table"].get<std::string>());
      }
      c.scorer.validation_dimension = s.value("validation_dimension", c.scorer.validation_dimension);
      c.scorer.evaluation_dimension = s.value("evaluation_dimension", c.scorer.evaluation_dimension);
      c.scorer.batch_size = s.value("batch_size", c.scorer.batch_size);
    }
    c.concurrency = j.value("concurrency", c.concurrency);
    if (j.contains("refusal_patterns")) {
      c.refusal_patterns = j["refusal_patterns"].get<std::vector<std::string>>();
    }
    if (j.contains("eval")) {
      const auto& e = j["eval"];
      c.eval.style_threshold = e.value("style_threshold", c.eval.style_threshold);
      c.eval.fluency_threshold = e.value("fluency_threshold", c.eval.fluency_threshold);
      if (e.contains("lexicon")) c.eval.lexicon = resolve(base_dir, e["lexicon"].get<std::string>());
    }
  } catch (const nlohmann::json::exception& e) {
    throw ConfigError(std::string("invalid config: ") + e.what());
  }
  c.split.seed = c.seed;
  c.validate();
  return c;
}

PipelineConfig PipelineConfig::load(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot open config '" + path.string() + "'");
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("config '" + path.string() + "' is not valid JSON: " + e.what());
  }
  return from_json(j, path.parent_path());
}

void PipelineConfig::validate() const {
  split.validate();
  thresholds.validate();
  params.paraphrase.validate();
  params.content_check.validate();
  params.toxicity_check.validate();
  if (concurrency == 0) throw ConfigError("concurrency must be at least 1");
  if (backend.kind != "openai" && backend.kind != "mock") {
    throw ConfigError("backend.kind must be 'openai' or 'mock'");
  }
  if (scorer.kind != "none" && scorer.kind != "mock" && scorer.kind != "http") {
    throw ConfigError("scorer.kind must be 'none', 'mock' or 'http'");
  }
  if (gating == GatingPolicy::Conjunctive && scorer.kind == "none") {
    throw ConfigError("conjunctive gating needs a scorer (scorer.kind mock or http)");
  }
  if (backend.max_attempts < 1) throw ConfigError("backend.max_attempts must be at least 1");
  if (backend.rate_limit_per_second < 0) throw ConfigError("rate limit must be nonnegative");
}

nlohmann::json PipelineConfig::semantic_json() const {
  nlohmann::json backend_id;
  if (backend.kind == "mock") {
    backend_id = {{"kind", "mock"}, {"script", file_digest(backend.mock_script)}};
  } else {
    backend_id = {{"kind", backend.kind}, {"base_url", backend.base_url}};
  }
  nlohmann::json scorer_id = {{"kind", scorer.kind}};
  if (scorer.kind == "mock") scorer_id["table"] = scorer.mock_table.empty() ? "builtin" : file_digest(scorer.mock_table);
  if (scorer.kind == "http") scorer_id["base_url"] = scorer.base_url;
  return nlohmann::json{
      {"prompts",
       {prompt_json(prompts.paraphrase), prompt_json(prompts.fallback),
        prompt_json(prompts.content_check), prompt_json(prompts.toxicity_check)}},
      {"params",
       {{"paraphrase", params.paraphrase},
        {"content_check", params.content_check},
        {"toxicity_check", params.toxicity_check}}},
      {"thresholds", thresholds},
      {"gating", std::string(to_string(gating))},
      {"split", {{"ratios", {split.train, split.val, split.test}}, {"seed", split.seed}}},
      {"refusal_patterns", refusal_patterns},
      {"backend", backend_id},
      {"scorer", scorer_id},
  };
}

std::string PipelineConfig::hash() const { return sha256_hex(semantic_json().dump()); }

}  // namespace detox
