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

#include <chrono>
#include <filesystem>
#include <map>
#include <memory>
#include <string>
#include <string_view>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

#include "detox/scoring.hpp"

namespace detox {

// Validation embeddings cross-check the content verdicts during corpus
// construction; Evaluation embeddings score system outputs. The two are
// separate models and never substitute for each other.
enum class ProfileName { Validation, Evaluation };

std::string_view to_string(ProfileName name);
ProfileName profile_from_string(std::string_view name);

struct EmbeddingProfile {
  ProfileName name = ProfileName::Validation;
  std::string endpoint = "/embed";
  int dimension = 64;
};

enum class ScoreKind { Toxicity, Fluency, Style };

std::string_view to_string(ScoreKind kind);
ScoreKind score_kind_from_string(std::string_view name);

using Embedding = std::vector<double>;

class Scorer {
 public:
  virtual ~Scorer() = default;
  virtual std::string id() const = 0;
  // Throws ServiceError when the service is unreachable or answers badly.
  virtual std::vector<Embedding> embed(const std::vector<std::string>& texts,
                                       ProfileName profile) = 0;
  // Scores in [0, 1], one per text.
  virtual std::vector<double> score(const std::vector<std::string>& texts, ScoreKind kind) = 0;
};

// Deterministic offline scorer.
//
// Embeddings: explicit vectors from the table when present, otherwise a
// hashed bag of words (each lowercase token contributes a pseudo-random
// vector seeded by the token and the profile), so texts sharing words have
// positive cosine and identical texts have cosine 1.
// Scores: exact-text lookup per kind, else the per-kind default.
//
//   {"dimension": 64,
//    "embeddings": {"some text": [..]},
//    "scores": {"toxicity": {"some text": 0.95}},
//    "defaults": {"toxicity": 0.05, "fluency": 0.9, "style": 0.05}}
class MockScorer : public Scorer {
 public:
  MockScorer();
  explicit MockScorer(const nlohmann::json& table);
  static std::shared_ptr<MockScorer> from_file(const std::filesystem::path& path);

  std::string id() const override { return id_; }
  std::vector<Embedding> embed(const std::vector<std::string>& texts, ProfileName profile) override;
  std::vector<double> score(const std::vector<std::string>& texts, ScoreKind kind) override;

  int dimension() const { return dimension_; }
  Embedding hashed_embedding(std::string_view text, ProfileName profile) const;

 private:
  std::string id_;
  int dimension_ = 64;
  std::unordered_map<std::string, Embedding> explicit_;
  std::map<ScoreKind, std::unordered_map<std::string, double>> scores_;
  std::map<ScoreKind, double> defaults_{
      {ScoreKind::Toxicity, 0.05}, {ScoreKind::Fluency, 0.9}, {ScoreKind::Style, 0.05}};
};

// Client for the scorer HTTP service:
//   POST /embed {"texts": [...], "profile": "validation"|"evaluation"} -> {"vectors": [[...]]}
//   POST /score {"texts": [...], "kind": "toxicity"|"fluency"|"style"} -> {"scores": [...]}
class HttpScorer : public Scorer {
 public:
  explicit HttpScorer(std::string base_url, std::size_t batch_size = 64,
                      std::chrono::seconds timeout = std::chrono::seconds(60));

  std::string id() const override { return "http:" + base_url_; }
  std::vector<Embedding> embed(const std::vector<std::string>& texts, ProfileName profile) override;
  std::vector<double> score(const std::vector<std::string>& texts, ScoreKind kind) override;

 private:
  nlohmann::json post(const std::string& route, const nlohmann::json& body) const;

  std::string base_url_;
  std::size_t batch_size_;
  std::chrono::seconds timeout_;
};

// Server-side request handlers shared by the bundled mock service and
// tests; they validate the request shape and throw ArgumentError on
// malformed bodies.
nlohmann::json handle_embed_request(Scorer& scorer, const nlohmann::json& body);
nlohmann::json handle_score_request(Scorer& scorer, const nlohmann::json& body);

// Response validators used by every client path.
std::vector<Embedding> checked_vectors(const nlohmann::json& response, std::size_t expected,
                                       int dimension);
std::vector<double> checked_scores(const nlohmann::json& response, std::size_t expected);
void validate_vectors(const std::vector<Embedding>& vectors, std::size_t expected, int dimension);
void validate_scores(const std::vector<double>& scores, std::size_t expected);

struct SimilarityLabel {
  bool same_meaning = false;
  double score = 0.0;
};

// Label is "Yes" iff cosine(toxic, detox) > thresholds.content_sim_min.
SimilarityLabel similarity_label(std::string_view toxic, std::string_view detox, Scorer& scorer,
                                 const EmbeddingProfile& profile, const ScoreThresholds& thresholds);

struct ToxicityLabel {
  bool toxic = false;
  double score = 0.0;
};

// Toxic iff the toxicity score > thresholds.toxicity_max_for_nontoxic.
ToxicityLabel toxicity_label(std::string_view text, Scorer& scorer,
                             const ScoreThresholds& thresholds);

}  // namespace detox
