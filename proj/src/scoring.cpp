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

#include "detox/scoring.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "detox/error.hpp"
#include "detox/text_util.hpp"

namespace detox {

void ScoreThresholds::validate() const {
  auto in_unit = [](double v) { return v >= 0.0 && v <= 1.0; };
  if (!in_unit(content_sim_min) || !in_unit(toxicity_max_for_nontoxic)) {
    throw ConfigError("score thresholds must lie in [0, 1]");
  }
}

void to_json(nlohmann::json& j, const ScoreThresholds& t) {
  j = nlohmann::json{{"content_sim_min", t.content_sim_min},
                     {"toxicity_max_for_nontoxic", t.toxicity_max_for_nontoxic}};
}

void from_json(const nlohmann::json& j, ScoreThresholds& t) {
  t.content_sim_min = j.value("content_sim_min", t.content_sim_min);
  t.toxicity_max_for_nontoxic = j.value("toxicity_max_for_nontoxic", t.toxicity_max_for_nontoxic);
  t.validate();
}

double cosine_similarity(std::span<const double> a, std::span<const double> b) {
  if (a.size() != b.size()) {
    throw ArgumentError("cosine: dimension mismatch " + std::to_string(a.size()) + " vs " +
                        std::to_string(b.size()));
  }
  if (a.empty()) throw ArgumentError("cosine: empty vectors");
  double dot = 0.0;
  double na = 0.0;
  double nb = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) {
    dot += a[i] * b[i];
    na += a[i] * a[i];
    nb += b[i] * b[i];
  }
  if (na == 0.0 || nb == 0.0) throw ArgumentError("cosine: zero vector");
  return std::clamp(dot / std::sqrt(na * nb), -1.0, 1.0);
}

void to_json(nlohmann::json& j, const AgreementReport& r) {
  j = nlohmann::json{{"kappa", r.kappa},
                     {"n", r.n},
                     {"observed_agreement", r.observed_agreement},
                     {"expected_agreement", r.expected_agreement},
                     {"confusion", r.confusion}};
}

void from_json(const nlohmann::json& j, AgreementReport& r) {
  j.at("kappa").get_to(r.kappa);
  j.at("n").get_to(r.n);
  j.at("observed_agreement").get_to(r.observed_agreement);
  j.at("expected_agreement").get_to(r.expected_agreement);
  j.at("confusion").get_to(r.confusion);
}

AgreementReport cohen_kappa(std::span<const bool> a, std::span<const bool> b) {
  if (a.size() != b.size()) throw ArgumentError("kappa: label lists differ in length");
  if (a.empty()) throw ArgumentError("kappa: no labels");
  AgreementReport r;
  r.n = a.size();
  for (std::size_t i = 0; i < a.size(); ++i) ++r.confusion[a[i] ? 1 : 0][b[i] ? 1 : 0];

  const auto n = static_cast<double>(r.n);
  const auto agree = static_cast<double>(r.confusion[0][0] + r.confusion[1][1]);
  const auto a_pos = static_cast<double>(r.confusion[1][0] + r.confusion[1][1]);
  const auto b_pos = static_cast<double>(r.confusion[0][1] + r.confusion[1][1]);
  r.observed_agreement = agree / n;
  r.expected_agreement = (a_pos * b_pos + (n - a_pos) * (n - b_pos)) / (n * n);
  if (r.expected_agreement >= 1.0) {
    r.kappa = r.observed_agreement >= 1.0 ? 1.0 : 0.0;
  } else {
    r.kappa = (r.observed_agreement - r.expected_agreement) / (1.0 - r.expected_agreement);
  }
  r.kappa = std::clamp(r.kappa, -1.0, 1.0);
  return r;
}

std::vector<std::string> bleu_tokenize(std::string_view text) {
  std::string spaced;
  spaced.reserve(text.size() * 2);
  for (char c : text) {
    if (is_ascii_punct(c)) {
      spaced.push_back(' ');
      spaced.push_back(c);
      spaced.push_back(' ');
    } else {
      spaced.push_back(c >= 'A' && c <= 'Z' ? static_cast<char>(c - 'A' + 'a') : c);
    }
  }
  return split_whitespace(spaced);
}

namespace {

using Ngram = std::vector<std::string>;

std::map<Ngram, int> count_ngrams(const std::vector<std::string>& tokens, std::size_t order) {
  std::map<Ngram, int> counts;
  if (tokens.size() < order) return counts;
  for (std::size_t i = 0; i + order <= tokens.size(); ++i) {
    ++counts[Ngram(tokens.begin() + static_cast<std::ptrdiff_t>(i),
                   tokens.begin() + static_cast<std::ptrdiff_t>(i + order))];
  }
  return counts;
}

}  // namespace

BleuStats bleu_sentence_stats(const std::vector<std::string>& hyp,
                              const std::vector<std::string>& ref) {
  BleuStats stats;
  stats.hyp_length = static_cast<double>(hyp.size());
  stats.ref_length = static_cast<double>(ref.size());
  for (int n = 1; n <= kBleuMaxOrder; ++n) {
    const auto order = static_cast<std::size_t>(n);
    const auto hyp_counts = count_ngrams(hyp, order);
    const auto ref_counts = count_ngrams(ref, order);
    double matched = 0;
    for (const auto& [gram, count] : hyp_counts) {
      auto it = ref_counts.find(gram);
      if (it != ref_counts.end()) matched += std::min(count, it->second);
    }
    stats.matches[n - 1] = matched;
    stats.totals[n - 1] = hyp.size() >= order ? static_cast<double>(hyp.size() - order + 1) : 0.0;
  }
  return stats;
}

double bleu_from_stats(const BleuStats& stats) {
  double log_precision = 0.0;
  for (int n = 0; n < kBleuMaxOrder; ++n) {
    const double p = stats.matches[n] > 0 ? stats.matches[n] / stats.totals[n]
                                          : kBleuEpsilon / std::max(stats.totals[n], 1.0);
    log_precision += std::log(p) / kBleuMaxOrder;
  }
  if (stats.hyp_length <= 0) return 0.0;
  const double brevity = stats.hyp_length <= stats.ref_length
                             ? std::exp(1.0 - stats.ref_length / stats.hyp_length)
                             : 1.0;
  return std::clamp(brevity * std::exp(log_precision), 0.0, 1.0);
}

double corpus_bleu(std::span<const std::string> hypotheses, std::span<const std::string> references) {
  if (hypotheses.size() != references.size()) {
    throw ArgumentError("bleu: " + std::to_string(hypotheses.size()) + " hypotheses vs " +
                        std::to_string(references.size()) + " references");
  }
  if (hypotheses.empty()) throw ArgumentError("bleu: empty corpus");
  BleuStats total;
  for (std::size_t i = 0; i < hypotheses.size(); ++i) {
    const auto s = bleu_sentence_stats(bleu_tokenize(hypotheses[i]), bleu_tokenize(references[i]));
    for (int n = 0; n < kBleuMaxOrder; ++n) {
      total.matches[n] += s.matches[n];
      total.totals[n] += s.totals[n];
    }
    total.hyp_length += s.hyp_length;
    total.ref_length += s.ref_length;
  }
  return bleu_from_stats(total);
}

}  // namespace detox
