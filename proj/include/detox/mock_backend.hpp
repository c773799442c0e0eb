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
#include <memory>
#include <mutex>
#include <optional>
#include <regex>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "detox/llm_client.hpp"

namespace detox {

// Scripted offline backend. A script is a JSON document:
//
//   {"rules": [
//      {"contains": "idiot", "response": "You are not very smart"},
//      {"exact": "ping", "failures": [429, 429], "response": "pong"},
//      {"regex": "^Text: .*", "fail": 503}
//   ]}
//
// Rules are consulted in order against the user message; the first match
// wins. "failures" is consumed one entry per dispatch before the rule starts
// answering; "fail" makes the rule fail forever. Token counts default to
// whitespace token counts unless the rule sets input_tokens/output_tokens.
// An unmatched request answers HTTP 400.
class MockBackend : public ChatBackend {
 public:
  struct Rule {
    enum class Kind { Exact, Contains, Regex } kind = Kind::Contains;
    std::string pattern;
    std::optional<std::regex> compiled;
    std::optional<std::string> response;
    std::vector<int> failures;
    std::optional<int> fail_always;
    std::optional<std::int64_t> input_tokens;
    std::optional<std::int64_t> output_tokens;
    std::size_t hits = 0;
  };

  struct Dispatch {
    std::chrono::steady_clock::time_point at;
    std::string user;
    int status = 0;
  };

  explicit MockBackend(const nlohmann::json& script);
  static std::shared_ptr<MockBackend> from_file(const std::filesystem::path& path);

  std::string id() const override { return id_; }
  BackendReply send(const ChatRequest& request) override;

  std::vector<Dispatch> dispatch_log() const;
  std::size_t dispatch_count() const;

 private:
  std::string id_;
  mutable std::mutex mu_;
  std::vector<Rule> rules_;
  std::vector<Dispatch> log_;
};

}  // namespace detox
