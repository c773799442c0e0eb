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

#include <gtest/gtest.h>

#include <nlohmann/json.hpp>

#include "../support/temp_dir.hpp"
#include "detox/config.hpp"
#include "detox/error.hpp"

namespace detox {
namespace {

using test::fixture;

TEST(Config, ShippedExampleLoads) {
  const auto c = PipelineConfig::load(std::filesystem::path(DETOX_PROMPTS) / ".." / "config" /
                                      "pipeline.json");
  EXPECT_EQ(c.sources.size(), 4u);
  EXPECT_EQ(c.params.paraphrase.model_name, "gpt-4o-mini");
  EXPECT_EQ(c.prompts.fallback.version(), default_prompt(TaskKind::ParaphraseFallback).version());
  EXPECT_EQ(c.gating, GatingPolicy::LlmVerdict);
  EXPECT_EQ(c.split.seed, 42u);
}

TEST(Config, DefaultsFromEmptyDocument) {
  const auto c = PipelineConfig::from_json(nlohmann::json::object());
  EXPECT_EQ(c.params.content_check.max_tokens, 256);
  EXPECT_DOUBLE_EQ(c.thresholds.content_sim_min, 0.70);
  EXPECT_DOUBLE_EQ(c.split.train, 0.8);
  EXPECT_EQ(c.scorer.kind, "none");
}

TEST(Config, TaskOverridesApplyPerTask) {
  const auto c = PipelineConfig::from_json(nlohmann::json::parse(
      R"({"model": {"temperature": 0.6}, "task_overrides": {"toxicity_check": {"temperature": 0.0}}})"));
  EXPECT_DOUBLE_EQ(c.params.toxicity_check.temperature, 0.0);
  EXPECT_DOUBLE_EQ(c.params.paraphrase.temperature, 0.6);
}

TEST(Config, InvalidDocumentsAreConfigErrors) {
  const char* bad[] = {
      R"({"gating": "vibes"})",
      R"({"gating": "conjunctive"})",
      R"({"split": {"ratios": [0.8, 0.2]}})",
      R"({"split": {"ratios": [0.7, 0.1, 0.1]}})",
      R"({"thresholds": {"content_sim_min": 2}})",
      R"({"backend": {"kind": "carrier-pigeon"}})",
      R"({"backend": {"api_key": "sk-not-here"}})",
      R"({"scorer": {"kind": "oracle"}})",
      R"({"concurrency": 0})",
      R"({"seed": "forty-two"})",
  };
  for (const char* doc : bad) {
    EXPECT_THROW(PipelineConfig::from_json(nlohmann::json::parse(doc)), ConfigError) << doc;
  }
  EXPECT_THROW(PipelineConfig::load("/no/such/config.json"), ConfigError);
}

TEST(Config, PromptFileMustMatchItsSlot) {
  const auto doc = nlohmann::json{
      {"prompts", {{"paraphrase", (std::filesystem::path(DETOX_PROMPTS) / "content_check.prompt").string()}}}};
  EXPECT_THROW(PipelineConfig::from_json(doc), ConfigError);
}

TEST(Config, HashTracksSemanticsOnly) {
  const auto base = PipelineConfig::load(fixture("pipeline/config.json"));
  auto c = base;
  c.concurrency = 1;
  c.backend.rate_limit_per_second = 3;
  EXPECT_EQ(c.hash(), base.hash());

  c = base;
  c.gating = GatingPolicy::Conjunctive;
  EXPECT_NE(c.hash(), base.hash());
  c = base;
  c.thresholds.content_sim_min = 0.71;
  EXPECT_NE(c.hash(), base.hash());
  c = base;
  c.params.paraphrase.temperature = 0.7;
  EXPECT_NE(c.hash(), base.hash());
  c = base;
  const auto& p = base.prompts.content_check;
  c.prompts.content_check = PromptTemplate(p.task(), "content-check-v2", p.system(), p.user_template());
  EXPECT_NE(c.hash(), base.hash());
}

}  // namespace
}  // namespace detox
