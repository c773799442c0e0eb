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

#include "detox/scorer.hpp"

#include <fstream>
#include <random>

#include "detox/error.hpp"
#include "detox/hash.hpp"

namespace detox {

std::string_view to_string(ProfileName name) {
  return name == ProfileName::Validation ? "validation" : "evaluation";
}

ProfileName profile_from_string(std::string_view name) {
  if (name == "validation") return ProfileName::Validation;
  if (name == "evaluation") return ProfileName::Evaluation;
  throw ArgumentError("unknown embedding profile '" + std::string(name) + "'");
}

std::string_view to_string(ScoreKind kind) {
  switch (kind) {
    case ScoreKind::Toxicity:
      return "toxicity";
    case ScoreKind::Fluency:
      return "fluency";
    case ScoreKind::Style:
      return "style";
  }
  return "unknown";
}

ScoreKind score_kind_from_string(std::string_view name) {
  for (auto kind : {ScoreKind::Toxicity, ScoreKind::Fluency, ScoreKind::Style}) {
    if (to_string(kind) == name) return kind;
  }
  throw ArgumentError("unknown score kind '" + std::string(name) + "'");
}

namespace {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace

MockScorer::MockScorer() : MockScorer(nlohmann::json::object()) {}

MockScorer::MockScorer(const nlohmann::json& table)
    : id_("mock-scorer:" + sha256_hex(table.dump()).substr(0, 16)) {
  if (!table.is_object()) throw ConfigError("mock scorer table must be a JSON object");
  dimension_ = table.value("dimension", 64);
  if (dimension_ <= 0) throw ConfigError("mock scorer dimension must be positive");
  if (table.contains("embeddings")) {
    for (const auto& [text, vec] : table["embeddings"].items()) {
      auto v = vec.get<Embedding>();
      if (static_cast<int>(v.size()) != dimension_) {
        throw ConfigError("mock embedding for '" + text + "' has dimension " +
                          std::to_string(v.size()) + ", expected " + std::to_string(dimension_));
      }
      explicit_.emplace(text, std::move(v));
    }
  }
  if (table.contains("scores")) {
    for (const auto& [kind, entries] : table["scores"].items()) {
      auto& bucket = scores_[score_kind_from_string(kind)];
      for (const auto& [text, value] : entries.items()) bucket[text] = value.get<double>();
    }
  }
  if (table.contains("defaults")) {
    for (const auto& [kind, value] : table["defaults"].items()) {
      defaults_[score_kind_from_string(kind)] = value.get<double>();
    }
  }
}

std::shared_ptr<MockScorer> MockScorer::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mock scorer table '" + path.string() + "'");
  try {
    return std::make_shared<MockScorer>(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("mock scorer table '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

Embedding MockScorer::hashed_embedding(std::string_view text, ProfileName profile) const {
  Embedding v(static_cast<std::size_t>(dimension_), 0.0);
  auto tokens = bleu_tokenize(text);
  if (tokens.empty()) tokens.emplace_back("<empty>");
  for (const auto& token : tokens) {
    std::mt19937_64 rng(fnv1a(token + '\x1f' + std::string(to_string(profile))));
    for (auto& x : v) {
      // 53 random bits mapped to [-1, 1).
      x += static_cast<double>(rng() >> 11) * 0x1.0p-52 - 1.0;
    }
  }
  return v;
}

std::vector<Embedding> MockScorer::embed(const std::vector<std::string>& texts,
                                         ProfileName profile) {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (const auto& t : texts) {
    auto it = explicit_.find(t);
    out.push_back(it != explicit_.end() ? it->second : hashed_embedding(t, profile));
  }
  return out;
}

std::vector<double> MockScorer::score(const std::vector<std::string>& texts, ScoreKind kind) {
  std::vector<double> out;
  out.reserve(texts.size());
  const auto bucket = scores_.find(kind);
  for (const auto& t : texts) {
    double s = defaults_.at(kind);
    if (bucket != scores_.end()) {
      if (auto it = bucket->second.find(t); it != bucket->second.end()) s = it->second;
    }
    out.push_back(s);
  }
  return out;
}

std::vector<Embedding> checked_vectors(const nlohmann::json& response, std::size_t expected,
                                       int dimension) {
  if (!response.is_object() || !response.contains("vectors") || !response["vectors"].is_array()) {
    throw ServiceError("embed response lacks a \"vectors\" array");
  }
  std::vector<Embedding> vectors;
  try {
    vectors = response["vectors"].get<std::vector<Embedding>>();
  } catch (const nlohmann::json::exception& e) {
    throw ServiceError(std::string("embed response has non-numeric vectors: ") + e.what());
  }
  validate_vectors(vectors, expected, dimension);
  return vectors;
}

void validate_vectors(const std::vector<Embedding>& vectors, std::size_t expected, int dimension) {
  if (vectors.size() != expected) {
    throw ServiceError("embed returned " + std::to_string(vectors.size()) + " vectors for " +
                       std::to_string(expected) + " texts");
  }
  for (const auto& v : vectors) {
    if (dimension > 0 && static_cast<int>(v.size()) != dimension) {
      throw ServiceError("embedding dimension " + std::to_string(v.size()) + ", profile declares " +
                         std::to_string(dimension));
    }
  }
}

std::vector<double> checked_scores(const nlohmann::json& response, std::size_t expected) {
  if (!response.is_object() || !response.contains("scores") || !response["scores"].is_array()) {
    throw ServiceError("score response lacks a \"scores\" array");
  }
  std::vector<double> scores;
  try {
    scores = response["scores"].get<std::vector<double>>();
  } catch (const nlohmann::json::exception& e) {
    throw ServiceError(std::string("score response has non-numeric scores: ") + e.what());
  }
  validate_scores(scores, expected);
  return scores;
}

void validate_scores(const std::vector<double>& scores, std::size_t expected) {
  if (scores.size() != expected) {
    throw ServiceError("score returned " + std::to_string(scores.size()) + " values for " +
                       std::to_string(expected) + " texts");
  }
  for (double s : scores) {
    if (!(s >= 0.0 && s <= 1.0)) throw ServiceError("score " + std::to_string(s) + " outside [0, 1]");
  }
}

namespace {

std::vector<std::string> request_texts(const nlohmann::json& body) {
  if (!body.is_object() || !body.contains("texts") || !body["texts"].is_array()) {
    throw ArgumentError("request body needs a \"texts\" array");
  }
  try {
    return body["texts"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception&) {
    throw ArgumentError("\"texts\" must be an array of strings");
  }
}

}  // namespace

nlohmann::json handle_embed_request(Scorer& scorer, const nlohmann::json& body) {
  const auto texts = request_texts(body);
  if (!body.contains("profile") || !body["profile"].is_string()) {
    throw ArgumentError("embed request needs a \"profile\" string");
  }
  const auto profile = profile_from_string(body["profile"].get<std::string>());
  return nlohmann::json{{"vectors", scorer.embed(texts, profile)}};
}

nlohmann::json handle_score_request(Scorer& scorer, const nlohmann::json& body) {
  const auto texts = request_texts(body);
  if (!body.contains("kind") || !body["kind"].is_string()) {
    throw ArgumentError("score request needs a \"kind\" string");
  }
  const auto kind = score_kind_from_string(body["kind"].get<std::string>());
  return nlohmann::json{{"scores", scorer.score(texts, kind)}};
}

SimilarityLabel similarity_label(std::string_view toxic, std::string_view detox, Scorer& scorer,
                                 const EmbeddingProfile& profile,
                                 const ScoreThresholds& thresholds) {
  const std::vector<std::string> texts{std::string(toxic), std::string(detox)};
  const auto vectors = scorer.embed(texts, profile.name);
  validate_vectors(vectors, texts.size(), profile.dimension);
  const double sim = cosine_similarity(vectors[0], vectors[1]);
  return SimilarityLabel{similarity_passes(sim, thresholds), sim};
}

ToxicityLabel toxicity_label(std::string_view text, Scorer& scorer,
                             const ScoreThresholds& thresholds) {
  const std::vector<std::string> texts{std::string(text)};
  const auto scores = scorer.score(texts, ScoreKind::Toxicity);
  validate_scores(scores, 1);
  return ToxicityLabel{toxicity_flags(scores[0], thresholds), scores[0]};
}

}  // namespace detox
