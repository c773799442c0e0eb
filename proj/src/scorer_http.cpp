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

#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <algorithm>

#include "detox/error.hpp"
#include "detox/http_util.hpp"
#include "detox/scorer.hpp"

namespace detox {

HttpScorer::HttpScorer(std::string base_url, std::size_t batch_size, std::chrono::seconds timeout)
    : base_url_(std::move(base_url)), batch_size_(std::max<std::size_t>(batch_size, 1)), timeout_(timeout) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
  if (base_url_.empty()) throw ConfigError("scorer base URL is empty (set DETOX_SCORER_BASE)");
}

nlohmann::json HttpScorer::post(const std::string& route, const nlohmann::json& body) const {
  const auto url = split_url(base_url_);
  httplib::Client client(url.origin);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  auto res = client.Post(url.path + route, body.dump(), "application/json");
  if (!res) {
    throw ServiceError("scorer unreachable at " + base_url_ + route + ": " +
                       httplib::to_string(res.error()));
  }
  if (res->status != 200) {
    throw ServiceError("scorer answered " + std::to_string(res->status) + " on " + route + ": " +
                       res->body.substr(0, 256));
  }
  try {
    return nlohmann::json::parse(res->body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ServiceError("scorer returned non-JSON on " + route + ": " + e.what());
  }
}

std::vector<Embedding> HttpScorer::embed(const std::vector<std::string>& texts, ProfileName profile) {
  std::vector<Embedding> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); i += batch_size_) {
    const std::size_t end = std::min(texts.size(), i + batch_size_);
    std::vector<std::string> batch(texts.begin() + static_cast<std::ptrdiff_t>(i),
                                   texts.begin() + static_cast<std::ptrdiff_t>(end));
    auto vectors = checked_vectors(
        post("/embed", {{"texts", batch}, {"profile", std::string(to_string(profile))}}),
        batch.size(), 0);
    for (auto& v : vectors) out.push_back(std::move(v));
  }
  return out;
}

std::vector<double> HttpScorer::score(const std::vector<std::string>& texts, ScoreKind kind) {
  std::vector<double> out;
  out.reserve(texts.size());
  for (std::size_t i = 0; i < texts.size(); i += batch_size_) {
    const std::size_t end = std::min(texts.size(), i + batch_size_);
    std::vector<std::string> batch(texts.begin() + static_cast<std::ptrdiff_t>(i),
                                   texts.begin() + static_cast<std::ptrdiff_t>(end));
    const auto scores = checked_scores(
        post("/score", {{"texts", batch}, {"kind", std::string(to_string(kind))}}), batch.size());
    out.insert(out.end(), scores.begin(), scores.end());
  }
  return out;
}

}  // namespace detox
