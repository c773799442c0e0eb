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

#include <atomic>

#include "../support/local_server.hpp"
#include "../support/temp_dir.hpp"
#include "detox/error.hpp"
#include "detox/scorer.hpp"

namespace detox {
namespace {

// Serves the scorer contract on a local port, backed by any Scorer.
class ScorerServer {
 public:
  explicit ScorerServer(Scorer& backing) {
    auto wrap = [](auto handler, Scorer& s) {
      return [handler, &s](const httplib::Request& req, httplib::Response& res) {
        try {
          res.set_content(handler(s, nlohmann::json::parse(req.body)).dump(), "application/json");
        } catch (const std::exception& e) {
          res.status = 400;
          res.set_content(e.what(), "text/plain");
        }
      };
    };
    srv_.server().Post("/embed", wrap(handle_embed_request, backing));
    srv_.server().Post("/score", wrap(handle_score_request, backing));
    srv_.server().set_pre_routing_handler([this](const httplib::Request&, httplib::Response&) {
      ++calls_;
      return httplib::Server::HandlerResponse::Unhandled;
    });
    srv_.start();
  }

  std::string base_url() const { return srv_.base_url(); }
  int calls() const { return calls_.load(); }

 private:
  std::atomic<int> calls_{0};
  test::LocalServer srv_;
};

TEST(MockScorer, ExplicitEmbeddingsAndScoreLookup) {
  MockScorer s(nlohmann::json::parse(R"({
    "dimension": 3,
    "embeddings": {"a": [1, 0, 0], "b": [0, 1, 0]},
    "scores": {"toxicity": {"bad": 0.97}},
    "defaults": {"toxicity": 0.01}})"));
  const auto v = s.embed({"a", "b", "c"}, ProfileName::Validation);
  EXPECT_EQ(v[0], (Embedding{1, 0, 0}));
  EXPECT_EQ(v[2].size(), 3u);
  EXPECT_EQ(s.score({"bad", "fine"}, ScoreKind::Toxicity), (std::vector<double>{0.97, 0.01}));
  EXPECT_DOUBLE_EQ(s.score({"x"}, ScoreKind::Fluency)[0], 0.9);
}

TEST(MockScorer, BadTablesRejected) {
  EXPECT_THROW(MockScorer(nlohmann::json::parse(R"({"dimension": 0})")), ConfigError);
  EXPECT_THROW(MockScorer(nlohmann::json::parse(R"({"dimension": 2, "embeddings": {"a": [1]}})")),
               ConfigError);
  EXPECT_THROW(MockScorer::from_file("/nonexistent/table.json"), IoError);
}

TEST(MockScorer, HashedEmbeddingsAreDeterministicAndProfileSpecific) {
  MockScorer s;
  const auto v1 = s.embed({"you are rude"}, ProfileName::Validation)[0];
  const auto v2 = s.embed({"you are rude"}, ProfileName::Validation)[0];
  const auto e = s.embed({"you are rude"}, ProfileName::Evaluation)[0];
  EXPECT_EQ(v1, v2);
  EXPECT_NE(v1, e);
  EXPECT_EQ(cosine_similarity(v1, v2), 1.0);
  // Shared words pull vectors together.
  const auto near = s.embed({"you are very rude"}, ProfileName::Validation)[0];
  const auto far = s.embed({"cheese platter tonight"}, ProfileName::Validation)[0];
  EXPECT_GT(cosine_similarity(v1, near), cosine_similarity(v1, far));
}

TEST(Labels, SimilarityAndToxicity) {
  MockScorer s(nlohmann::json::parse(R"({
    "dimension": 5,
    "embeddings": {"t": [1, 0, 0, 0, 0], "at70": [7, 1, 5, 5, 0], "at71": [71, 70, 7, 3, 1]},
    "scores": {"toxicity": {"edge": 0.9, "over": 0.91}}})"));
  const EmbeddingProfile profile{ProfileName::Validation, "/embed", 5};
  const ScoreThresholds th;
  EXPECT_FALSE(similarity_label("t", "at70", s, profile, th).same_meaning);
  EXPECT_TRUE(similarity_label("t", "at71", s, profile, th).same_meaning);
  EXPECT_FALSE(toxicity_label("edge", s, th).toxic);
  EXPECT_TRUE(toxicity_label("over", s, th).toxic);
  const EmbeddingProfile wrong_dim{ProfileName::Validation, "/embed", 64};
  EXPECT_THROW(similarity_label("t", "at70", s, wrong_dim, th), ServiceError);
}

TEST(Validators, RejectMalformedResponses) {
  EXPECT_THROW(checked_vectors(nlohmann::json::object(), 1, 0), ServiceError);
  EXPECT_THROW(checked_vectors(nlohmann::json::parse(R"({"vectors": [[1, 2]]})"), 2, 0),
               ServiceError);
  EXPECT_THROW(checked_vectors(nlohmann::json::parse(R"({"vectors": [[1, 2]]})"), 1, 3),
               ServiceError);
  EXPECT_THROW(checked_vectors(nlohmann::json::parse(R"({"vectors": [["x"]]})"), 1, 0),
               ServiceError);
  EXPECT_NO_THROW(checked_vectors(nlohmann::json::parse(R"({"vectors": [[1, 2]]})"), 1, 2));
  EXPECT_THROW(checked_scores(nlohmann::json::parse(R"({"scores": [1.5]})"), 1), ServiceError);
  EXPECT_THROW(checked_scores(nlohmann::json::parse(R"({"scores": [0.5]})"), 2), ServiceError);
  EXPECT_THROW(checked_scores(nlohmann::json::parse(R"({"scores": "no"})"), 1), ServiceError);
}

TEST(Handlers, RequestShapeEnforced) {
  MockScorer s;
  EXPECT_THROW(handle_embed_request(s, nlohmann::json::parse(R"({"texts": ["a"]})")), ArgumentError);
  EXPECT_THROW(handle_embed_request(s, nlohmann::json::parse(R"({"texts": "a", "profile": "validation"})")),
               ArgumentError);
  EXPECT_THROW(handle_embed_request(s, nlohmann::json::parse(R"({"texts": ["a"], "profile": "other"})")),
               ArgumentError);
  EXPECT_THROW(handle_score_request(s, nlohmann::json::parse(R"({"texts": ["a"], "kind": "nope"})")),
               ArgumentError);
  const auto r = handle_score_request(s, nlohmann::json::parse(R"({"texts": ["a", "b"], "kind": "style"})"));
  EXPECT_EQ(r["scores"].size(), 2u);
}

TEST(HttpScorer, RoundTripsThroughTheContractInBatches) {
  MockScorer backing(nlohmann::json::parse(R"({"dimension": 8, "scores": {"fluency": {"b": 0.25}}})"));
  ScorerServer server(backing);
  HttpScorer client(server.base_url(), 2);
  const std::vector<std::string> texts{"a", "b", "c", "d", "e"};
  const auto remote = client.embed(texts, ProfileName::Evaluation);
  EXPECT_EQ(remote, backing.embed(texts, ProfileName::Evaluation));
  EXPECT_EQ(server.calls(), 3);  // ceil(5 / 2)
  const auto scores = client.score(texts, ScoreKind::Fluency);
  EXPECT_DOUBLE_EQ(scores[1], 0.25);
  EXPECT_EQ(cosine_similarity(remote[0], remote[0]), 1.0);
}

TEST(HttpScorer, ServerErrorsBecomeServiceErrors) {
  test::LocalServer srv;
  srv.server().Post("/embed", [](const httplib::Request&, httplib::Response& res) {
    res.status = 500;
  });
  srv.server().Post("/score", [](const httplib::Request&, httplib::Response& res) {
    res.set_content("{not json", "application/json");
  });
  srv.start();
  HttpScorer client(srv.base_url());
  EXPECT_THROW(client.embed({"a"}, ProfileName::Validation), ServiceError);
  EXPECT_THROW(client.score({"a"}, ScoreKind::Toxicity), ServiceError);
  HttpScorer dead("http://127.0.0.1:9", 4, std::chrono::seconds(2));
  EXPECT_THROW(dead.score({"a"}, ScoreKind::Toxicity), ServiceError);
  EXPECT_THROW(HttpScorer(""), ConfigError);
}

TEST(Names, RoundTrip) {
  for (auto p : {ProfileName::Validation, ProfileName::Evaluation}) {
    EXPECT_EQ(profile_from_string(to_string(p)), p);
  }
  for (auto k : {ScoreKind::Toxicity, ScoreKind::Fluency, ScoreKind::Style}) {
    EXPECT_EQ(score_kind_from_string(to_string(k)), k);
  }
}

}  // namespace
}  // namespace detox
