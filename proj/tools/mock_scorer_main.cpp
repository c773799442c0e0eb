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

// Serves the scorer HTTP contract from a MockScorer table, for running the
// pipeline offline against HttpScorer.
#define CPPHTTPLIB_OPENSSL_SUPPORT
#include <httplib.h>

#include <CLI11.hpp>
#include <iostream>
#include <memory>
#include <mutex>

#include "detox/error.hpp"
#include "detox/scorer.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Offline scorer service", "detox-mock-scorer"};
  std::string table;
  std::string host = "127.0.0.1";
  int port = 8099;
  app.add_option("--table", table, "MockScorer table (JSON)");
  app.add_option("--host", host);
  app.add_option("--port", port);
  CLI11_PARSE(app, argc, argv);

  std::shared_ptr<detox::MockScorer> scorer;
  try {
    scorer = table.empty() ? std::make_shared<detox::MockScorer>()
                           : detox::MockScorer::from_file(table);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 2;
  }

  std::mutex mu;
  auto route = [&](auto handler) {
    return [&, handler](const httplib::Request& req, httplib::Response& res) {
      try {
        const auto body = nlohmann::json::parse(req.body);
        std::lock_guard<std::mutex> lock(mu);
        res.set_content(handler(*scorer, body).dump(), "application/json");
      } catch (const nlohmann::json::exception& e) {
        res.status = 400;
        res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
      } catch (const detox::ArgumentError& e) {
        res.status = 400;
        res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
      } catch (const std::exception& e) {
        res.status = 500;
        res.set_content(nlohmann::json{{"error", e.what()}}.dump(), "application/json");
      }
    };
  };

  httplib::Server server;
  server.Post("/embed", route(detox::handle_embed_request));
  server.Post("/score", route(detox::handle_score_request));
  std::cerr << "listening on " << host << ":" << port << "\n";
  if (!server.listen(host, port)) {
    std::cerr << "error: cannot bind " << host << ":" << port << "\n";
    return 1;
  }
  return 0;
}
