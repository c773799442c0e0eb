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

#include <random>

#include "../support/oracles.hpp"
#include "detox/error.hpp"
#include "detox/scoring.hpp"

namespace detox {
namespace {

std::vector<bool> as_bools(const std::vector<int>& v) { return {v.begin(), v.end()}; }

double kappa_of(const std::vector<int>& a, const std::vector<int>& b) {
  const auto x = as_bools(a);
  const auto y = as_bools(b);
  // std::vector<bool> has no contiguous storage; copy into arrays.
  std::unique_ptr<bool[]> xa(new bool[x.size()]), ya(new bool[y.size()]);
  for (std::size_t i = 0; i < x.size(); ++i) {
    xa[i] = x[i];
    ya[i] = y[i];
  }
  return cohen_kappa({xa.get(), x.size()}, {ya.get(), y.size()}).kappa;
}

TEST(Kappa, MatchesOracleOnRandomLabelPairs) {
  std::mt19937_64 rng(1234);
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng() % 200;
    const double bias_a = static_cast<double>(rng() % 101) / 100.0;
    const double agree = static_cast<double>(rng() % 101) / 100.0;
    std::bernoulli_distribution da(bias_a), dagree(agree), coin(0.5);
    std::vector<int> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = da(rng);
      b[i] = dagree(rng) ? a[i] : coin(rng);
    }
    const double k = kappa_of(a, b);
    ASSERT_NEAR(k, oracle::kappa(a, b), 1e-12) << "trial " << trial;
    ASSERT_NEAR(k, kappa_of(b, a), 1e-12);
    ASSERT_GE(k, -1.0 - 1e-12);
    ASSERT_LE(k, 1.0 + 1e-12);
  }
}

TEST(Kappa, HandComputedTable) {
  // po = 0.75, pe = 0.5 -> kappa 0.5.
  const auto r = [] {
    const bool a[] = {true, true, false, false};
    const bool b[] = {true, false, false, false};
    return cohen_kappa(a, b);
  }();
  // po = 3/4; marginals a = 1/2, b = 1/4 -> pe = 1/8 + 3/8 = 1/2.
  EXPECT_DOUBLE_EQ(r.observed_agreement, 0.75);
  EXPECT_DOUBLE_EQ(r.expected_agreement, 0.5);
  EXPECT_DOUBLE_EQ(r.kappa, 0.5);
  EXPECT_EQ(r.n, 4u);
  EXPECT_EQ(r.confusion[1][1], 1u);
  EXPECT_EQ(r.confusion[1][0], 1u);
  EXPECT_EQ(r.confusion[0][0], 2u);
}

TEST(Kappa, DegenerateMarginals) {
  const bool all[] = {true, true, true};
  EXPECT_DOUBLE_EQ(cohen_kappa(all, all).kappa, 1.0);
  const bool a[] = {true, false};
  const bool b[] = {false, true};
  EXPECT_DOUBLE_EQ(cohen_kappa(a, b).kappa, -1.0);
  const bool one[] = {true};
  EXPECT_THROW(cohen_kappa(a, one), ArgumentError);
}

TEST(Kappa, ReportRoundTripsThroughJson) {
  const bool a[] = {true, false, true, true};
  const bool b[] = {true, false, false, true};
  const auto r = cohen_kappa(a, b);
  const auto back = nlohmann::json(r).get<AgreementReport>();
  EXPECT_DOUBLE_EQ(back.kappa, r.kappa);
  EXPECT_EQ(back.confusion, r.confusion);
}

TEST(Bleu, MatchesOracleOnRandomCorpora) {
  const std::vector<std::string> vocab{"the", "cat", "sat", "on", "a", "mat", "dog", "ran", ",",
                                       ".", "Big", "big", "red", "!", "it's", "very"};
  std::mt19937_64 rng(42);
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng() % 20;
    std::vector<std::string> hyps, refs;
    for (std::size_t i = 0; i < n; ++i) {
      refs.push_back(oracle::random_words(rng, vocab, 1, 15));
      hyps.push_back(rng() % 3 == 0 ? refs.back() : oracle::random_words(rng, vocab, 0, 15));
    }
    ASSERT_NEAR(corpus_bleu(hyps, refs), oracle::bleu(hyps, refs), 1e-6) << "trial " << trial;
  }
}

TEST(Bleu, IdentityAndDisjoint) {
  const std::vector<std::string> refs{"you are not being very smart today", "please stop talking now ok"};
  EXPECT_NEAR(corpus_bleu(refs, refs), 1.0, 1e-12);
  const std::vector<std::string> other{"zebra quantum marble sky fox", "lorem ipsum dolor sit amet"};
  EXPECT_LE(corpus_bleu(other, refs), 1e-6);
}

TEST(Bleu, BrevityPenaltyApplies) {
  const std::vector<std::string> ref{"a b c d e f g h"};
  const std::vector<std::string> hyp{"a b c d"};
  EXPECT_NEAR(corpus_bleu(hyp, ref), std::exp(1.0 - 8.0 / 4.0), 1e-12);
}

TEST(Bleu, InputErrors) {
  const std::vector<std::string> one{"x"};
  const std::vector<std::string> two{"x", "y"};
  const std::vector<std::string> none;
  EXPECT_THROW(corpus_bleu(one, two), ArgumentError);
  EXPECT_THROW(corpus_bleu(none, none), ArgumentError);
}

TEST(Bleu, TokenizerSplitsPunctuation) {
  EXPECT_EQ(bleu_tokenize("It's OK, Bob!"),
            (std::vector<std::string>{"it", "'", "s", "ok", ",", "bob", "!"}));
  EXPECT_TRUE(bleu_tokenize("   ").empty());
}

TEST(Cosine, Basics) {
  const std::vector<double> a{1, 2, 3};
  EXPECT_EQ(cosine_similarity(a, a), 1.0);
  const std::vector<double> neg{-1, -2, -3};
  EXPECT_DOUBLE_EQ(cosine_similarity(a, neg), -1.0);
  const std::vector<double> orth{0, 3, -2};
  EXPECT_NEAR(cosine_similarity(a, orth), 0.0, 1e-15);
  const std::vector<double> zero{0, 0, 0};
  const std::vector<double> short_v{1, 2};
  const std::vector<double> empty;
  EXPECT_THROW(cosine_similarity(a, zero), ArgumentError);
  EXPECT_THROW(cosine_similarity(a, short_v), ArgumentError);
  EXPECT_THROW(cosine_similarity(empty, empty), ArgumentError);
}

TEST(Cosine, SymmetricAndBoundedOnRandomVectors) {
  std::mt19937_64 rng(5);
  std::normal_distribution<double> g;
  for (int i = 0; i < 1000; ++i) {
    std::vector<double> a(16), b(16);
    for (auto& x : a) x = g(rng);
    for (auto& x : b) x = g(rng);
    const double s = cosine_similarity(a, b);
    ASSERT_EQ(s, cosine_similarity(b, a));
    ASSERT_GE(s, -1.0);
    ASSERT_LE(s, 1.0);
    ASSERT_EQ(cosine_similarity(a, a), 1.0);
  }
}

TEST(Thresholds, StrictInequalitiesAtTheBoundary) {
  const ScoreThresholds t;
  EXPECT_DOUBLE_EQ(t.content_sim_min, 0.70);
  EXPECT_DOUBLE_EQ(t.toxicity_max_for_nontoxic, 0.9);
  // Integer vectors whose cosines are exactly 0.70 and 0.71.
  const std::vector<double> a{1, 0, 0, 0, 0};
  const std::vector<double> b70{7, 1, 5, 5, 0};
  const std::vector<double> b71{71, 70, 7, 3, 1};
  EXPECT_EQ(cosine_similarity(a, b70), 0.7);
  EXPECT_EQ(cosine_similarity(a, b71), 0.71);
  EXPECT_FALSE(similarity_passes(cosine_similarity(a, b70), t));
  EXPECT_TRUE(similarity_passes(cosine_similarity(a, b71), t));
  EXPECT_FALSE(toxicity_flags(0.9, t));
  EXPECT_TRUE(toxicity_flags(0.91, t));
}

TEST(Thresholds, Validation) {
  ScoreThresholds t;
  t.content_sim_min = 1.5;
  EXPECT_THROW(t.validate(), ConfigError);
  t = {};
  t.toxicity_max_for_nontoxic = -0.1;
  EXPECT_THROW(t.validate(), ConfigError);
}

}  // namespace
}  // namespace detox
