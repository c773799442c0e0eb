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

#include <array>
#include <cstddef>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace detox {

struct ScoreThresholds {
  double content_sim_min = 0.70;
  double toxicity_max_for_nontoxic = 0.9;

  void validate() const;
};

void to_json(nlohmann::json& j, const ScoreThresholds& t);
void from_json(const nlohmann::json& j, ScoreThresholds& t);

// Strictly above the threshold counts as "same meaning".
inline bool similarity_passes(double score, const ScoreThresholds& t) {
  return score > t.content_sim_min;
}

// Strictly above the threshold counts as still toxic.
inline bool toxicity_flags(double score, const ScoreThresholds& t) {
  return score > t.toxicity_max_for_nontoxic;
}

// dot(a, b) / sqrt(|a|^2 |b|^2), clamped to [-1, 1]. Identical vectors give
// exactly 1. Throws ArgumentError on dimension mismatch, empty or all-zero
// input.
double cosine_similarity(std::span<const double> a, std::span<const double> b);

struct AgreementReport {
  double kappa = 0.0;
  std::size_t n = 0;
  double observed_agreement = 0.0;
  double expected_agreement = 0.0;
  // confusion[i][j]: rater A said i, rater B said j; index 1 = positive.
  std::array<std::array<std::size_t, 2>, 2> confusion{};
};

void to_json(nlohmann::json& j, const AgreementReport& r);
void from_json(const nlohmann::json& j, AgreementReport& r);

// Two-rater Cohen's kappa over binary labels. When expected agreement is 1
// the ratio is undefined; kappa is then 1 if observed agreement is 1, else 0.
AgreementReport cohen_kappa(std::span<const bool> a, std::span<const bool> b);

// Lowercases, splits every ASCII punctuation character into its own token,
// then splits on whitespace.
std::vector<std::string> bleu_tokenize(std::string_view text);

constexpr int kBleuMaxOrder = 4;
constexpr double kBleuEpsilon = 1e-9;

struct BleuStats {
  std::array<double, kBleuMaxOrder> matches{};
  std::array<double, kBleuMaxOrder> totals{};
  double hyp_length = 0;
  double ref_length = 0;
};

BleuStats bleu_sentence_stats(const std::vector<std::string>& hyp,
                              const std::vector<std::string>& ref);

// Corpus BLEU-4 from accumulated statistics: uniform weights, clipped
// n-gram precision; an order with no matches uses epsilon / max(total, 1);
// brevity penalty exp(1 - r/c) when c <= r.
double bleu_from_stats(const BleuStats& stats);

// Single reference per hypothesis. Throws ArgumentError on length mismatch
// or an empty corpus.
double corpus_bleu(std::span<const std::string> hypotheses, std::span<const std::string> references);

}  // namespace detox
