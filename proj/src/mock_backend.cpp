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

#include "detox/mock_backend.hpp"

#include <fstream>

#include "detox/error.hpp"
#include "detox/hash.hpp"
#include "detox/text_util.hpp"

namespace detox {

MockBackend::MockBackend(const nlohmann::json& script)
    : id_("mock:" + sha256_hex(script.dump()).substr(0, 16)) {
  if (!script.is_object() || !script.contains("rules") || !script["rules"].is_array()) {
    throw ConfigError("mock script must be an object with a \"rules\" array");
  }
  for (const auto& r : script["rules"]) {
    Rule rule;
    if (r.contains("exact")) {
      rule.kind = Rule::Kind::Exact;
      rule.pattern = r["exact"].get<std::string>();
    } else if (r.contains("contains")) {
      rule.kind = Rule::Kind::Contains;
      rule.pattern = r["contains"].get<std::string>();
    } else if (r.contains("regex")) {
      rule.kind = Rule::Kind::Regex;
      rule.pattern = r["regex"].get<std::string>();
      try {
        rule.compiled.emplace(rule.pattern, std::regex::ECMAScript);
      } catch (const std::regex_error& e) {
        throw ConfigError("bad regex in mock script '" + rule.pattern + "': " + e.what());
      }
    } else {
      throw ConfigError("mock rule needs one of exact/contains/regex: " + r.dump());
    }
    if (r.contains("response")) rule.response = r["response"].get<std::string>();
    if (r.contains("failures")) rule.failures = r["failures"].get<std::vector<int>>();
    if (r.contains("fail")) rule.fail_always = r["fail"].get<int>();
    if (r.contains("input_tokens")) rule.input_tokens = r["input_tokens"].get<std::int64_t>();
    if (r.contains("output_tokens")) rule.output_tokens = r["output_tokens"].get<std::int64_t>();
    if (!rule.response && !rule.fail_always) {
      throw ConfigError("mock rule has neither response nor fail: " + r.dump());
    }
    rules_.push_back(std::move(rule));
  }
}

std::shared_ptr<MockBackend> MockBackend::from_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open mock script '" + path.string() + "'");
  try {
    return std::make_shared<MockBackend>(nlohmann::json::parse(in));
  } catch (const nlohmann::json::parse_error& e) {
    throw ConfigError("mock script '" + path.string() + "' is not valid JSON: " + e.what());
  }
}

BackendReply MockBackend::send(const ChatRequest& request) {
  std::lock_guard lock(mu_);
  const auto now = std::chrono::steady_clock::now();
  Rule* match = nullptr;
  for (auto& rule : rules_) {
    bool hit = false;
    switch (rule.kind) {
      case Rule::Kind::Exact:
        hit = request.user == rule.pattern;
        break;
      case Rule::Kind::Contains:
        hit = request.user.find(rule.pattern) != std::string::npos;
        break;
      case Rule::Kind::Regex:
        hit = std::regex_search(request.user, *rule.compiled);
        break;
    }
    if (hit) {
      match = &rule;
      break;
    }
  }

  BackendReply reply;
  if (match == nullptr) {
    reply.status = 400;
    reply.error = "mock: no rule matches request";
  } else if (match->hits < match->failures.size()) {
    reply.status = match->failures[match->hits];
    reply.error = "mock: scripted failure";
  } else if (match->fail_always) {
    reply.status = *match->fail_always;
    reply.error = "mock: scripted failure";
  } else {
    reply.text = *match->response;
    std::int64_t in_tokens = static_cast<std::int64_t>(split_whitespace(request.user).size());
    if (request.system) in_tokens += static_cast<std::int64_t>(split_whitespace(*request.system).size());
    reply.input_tokens = match->input_tokens.value_or(in_tokens);
    reply.output_tokens =
        match->output_tokens.value_or(static_cast<std::int64_t>(split_whitespace(reply.text).size()));
  }
  if (match != nullptr) ++match->hits;
  log_.push_back({now, request.user, reply.status});
  return reply;
}

std::vector<MockBackend::Dispatch> MockBackend::dispatch_log() const {
  std::lock_guard lock(mu_);
  return log_;
}

std::size_t MockBackend::dispatch_count() const {
  std::lock_guard lock(mu_);
  return log_.size();
}

}  // namespace detox
