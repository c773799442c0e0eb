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

#include <cstddef>
#include <filesystem>
#include <optional>
#include <string>
#include <string_view>
#include <unordered_set>
#include <vector>

#include <nlohmann/json.hpp>

#include "detox/scorer.hpp"

namespace detox {

struct EvalItem {
  std::string id;
  std::string toxic;
  std::string output;
};

struct SampleEval {
  std::string id;
  double style = 0.0;    // style-classifier score, higher = more toxic
  bool non_toxic = false;
  double sim = 0.0;      // evaluation-profile cosine(toxic, output)
  double fluency = 0.0;  // acceptability score
  bool fluent = false;
};

void to_json(nlohmann::json& j, const SampleEval& s);

struct EvalReport {
  double style_accuracy = 0.0;
  double content_preservation = 0.0;
  double fluency = 0.0;
  double bleu = 0.0;
  std::size_t n = 0;
  std::vector<SampleEval> per_sample;
};

void to_json(nlohmann::json& j, const EvalReport& r);

struct EvalOptions {
  double style_threshold = 0.5;    // style <= threshold is non-toxic
  double fluency_threshold = 0.5;  // fluency > threshold is fluent
  int evaluation_dimension = 0;    // 0: whatever the scorer returns
};

// Throws ArgumentError when items and references differ in length or are
// empty; scorer failures propagate as ServiceError and no report is built.
EvalReport evaluate(const std::vector<EvalItem>& items, const std::vector<std::string>& references,
                    Scorer& scorer, const EvalOptions& options = {});

std::string baseline_duplicate(std::string_view toxic);

using Lexicon = std::unordered_set<std::string>;

// One token per line, lowercased; blank lines and '#' comments ignored.
// Throws ConfigError when the file cannot be read.
Lexicon load_lexicon(const std::filesystem::path& path);

// Drops whitespace tokens whose lowercase form, with or without surrounding
// punctuation, is in the lexicon; survivors are joined by single spaces.
std::string baseline_delete(std::string_view toxic, const Lexicon& lexicon);

// Two-column file "toxic TAB output", one item per line. With
// toxic_only set, a single column is accepted and output is left empty.
// Throws ArgumentError naming the 1-based line of a malformed row.
std::vector<EvalItem> read_eval_items(const std::filesystem::path& path, bool toxic_only = false);

// One reference per line. Throws IoError when missing.
std::vector<std::string> read_references(const std::filesystem::path& path);

// Throws ArgumentError naming the first line without a partner.
void check_alignment(std::size_t items, std::size_t references);

// eval_report.json and eval_per_sample.jsonl under out_dir.
void write_eval_report(const std::filesystem::path& out_dir, const EvalReport& report);

}  // namespace detox
