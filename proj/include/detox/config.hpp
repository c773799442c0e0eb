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

#pragma once

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "detox/annotator.hpp"
#include "detox/ingest.hpp"
#include "detox/llm_client.hpp"
#include "detox/prompts.hpp"
#include "detox/scorer.hpp"
#include "detox/scoring.hpp"

namespace detox {

enum class GatingPolicy { LlmVerdict, Conjunctive };

std::string_view to_string(GatingPolicy policy);
GatingPolicy gating_policy_from_string(std::string_view name);

struct SplitSpec {
  double train = 0.8;
  double val = 0.1;
  double test = 0.1;
  std::uint64_t seed = 42;

  // Ratios positive and summing to 1 within 1e-9.
  void validate() const;
};

struct BackendConfig {
  std::string kind = "openai";  // openai | mock
  std::string base_url = "https://api.openai.com/v1";
  std::filesystem::path mock_script;
  int max_attempts = 5;
  int base_delay_ms = 1000;
  double jitter = 0.2;
  double rate_limit_per_second = 0.0;
  bool cache = true;
  std::filesystem::path cache_path;  // empty: <out>/cache.jsonl
  int timeout_seconds = 60;
};

struct ScorerConfig {
  std::string kind = "none";  // none | mock | http
  std::string base_url;
  std::filesystem::path mock_table;
  int validation_dimension = 0;  // 0: accept what the service returns
  int evaluation_dimension = 0;
  std::size_t batch_size = 64;
};

struct EvalConfig {
  double style_threshold = 0.5;    // style score <= threshold counts as non-toxic
  double fluency_threshold = 0.5;  // fluency score > threshold counts as fluent
  std::filesystem::path lexicon;
};

struct PipelineConfig {
  std::uint64_t seed = 42;
  std::vector<ReaderSpec> sources;
  LabelPolicy label_policy;
  PromptSet prompts = PromptSet::defaults();
  TaskParams params;
  ScoreThresholds thresholds;
  GatingPolicy gating = GatingPolicy::LlmVerdict;
  SplitSpec split;
  Pricing pricing;
  BackendConfig backend;
  ScorerConfig scorer;
  std::size_t concurrency = 8;
  std::vector<std::string> refusal_patterns = default_refusal_patterns();
  EvalConfig eval;

  // Relative paths resolve against base_dir.
  static PipelineConfig from_json(const nlohmann::json& j,
                                  const std::filesystem::path& base_dir = {});
  static PipelineConfig load(const std::filesystem::path& path);

  void validate() const;

  // The parts of the configuration that change annotation results; a run
  // can only be resumed under an identical hash.
  nlohmann::json semantic_json() const;
  std::string hash() const;

  EmbeddingProfile validation_profile() const {
    return {ProfileName::Validation, "/embed", scorer.validation_dimension};
  }
  EmbeddingProfile evaluation_profile() const {
    return {ProfileName::Evaluation, "/embed", scorer.evaluation_dimension};
  }
};

}  // namespace detox
