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

#include "detox/llm_client.hpp"

#include <cmath>
#include <iomanip>
#include <sstream>
#include <thread>

#include "detox/error.hpp"
#include "detox/hash.hpp"

namespace detox {

void ModelParams::validate() const {
  if (model_name.empty()) throw ConfigError("model_name must not be empty");
  if (max_tokens <= 0) throw ConfigError("max_tokens must be positive");
  if (!(temperature >= 0.0 && temperature <= 2.0)) {
    throw ConfigError("temperature must be in [0, 2]");
  }
}

void to_json(nlohmann::json& j, const ModelParams& p) {
  j = nlohmann::json{
      {"model_name", p.model_name}, {"max_tokens", p.max_tokens}, {"temperature", p.temperature}};
}

void from_json(const nlohmann::json& j, ModelParams& p) {
  p.model_name = j.value("model_name", p.model_name);
  p.max_tokens = j.value("max_tokens", p.max_tokens);
  p.temperature = j.value("temperature", p.temperature);
  p.validate();
}

void UsageLedger::add(const std::string& task, std::int64_t input, std::int64_t output) {
  total_.input += input;
  total_.output += output;
  auto& bucket = per_task_[task];
  bucket.input += input;
  bucket.output += output;
}

void UsageLedger::merge(const UsageLedger& other) {
  for (const auto& [task, count] : other.per_task_) add(task, count.input, count.output);
}

void to_json(nlohmann::json& j, const UsageLedger& ledger) {
  nlohmann::json per_task = nlohmann::json::object();
  for (const auto& [task, count] : ledger.per_task()) {
    per_task[task] = {{"input_tokens", count.input}, {"output_tokens", count.output}};
  }
  j = nlohmann::json{{"total_input_tokens", ledger.total_input_tokens()},
                     {"total_output_tokens", ledger.total_output_tokens()},
                     {"per_task", per_task}};
}

void from_json(const nlohmann::json& j, UsageLedger& ledger) {
  ledger = UsageLedger{};
  if (!j.contains("per_task")) return;
  for (const auto& [task, count] : j.at("per_task").items()) {
    ledger.add(task, count.value("input_tokens", std::int64_t{0}),
               count.value("output_tokens", std::int64_t{0}));
  }
}

void to_json(nlohmann::json& j, const Pricing& p) {
  j = nlohmann::json{{"input_per_million", p.input_per_million},
                     {"output_per_million", p.output_per_million}};
}

void from_json(const nlohmann::json& j, Pricing& p) {
  p.input_per_million = j.value("input_per_million", 0.0);
  p.output_per_million = j.value("output_per_million", 0.0);
  if (p.input_per_million < 0 || p.output_per_million < 0) {
    throw ConfigError("prices must be nonnegative");
  }
}

double CostEstimate::rounded() const { return std::round(total * 1000.0) / 1000.0; }

std::string CostEstimate::display() const {
  std::ostringstream out;
  out << '$' << std::fixed << std::setprecision(3) << rounded();
  return out.str();
}

CostEstimate estimate_cost(const UsageLedger& ledger, const Pricing& pricing) {
  CostEstimate cost;
  cost.input = static_cast<double>(ledger.total_input_tokens()) / 1e6 * pricing.input_per_million;
  cost.output = static_cast<double>(ledger.total_output_tokens()) / 1e6 * pricing.output_per_million;
  cost.total = cost.input + cost.output;
  return cost;
}

RateLimiter::RateLimiter(double per_second, std::chrono::milliseconds margin) {
  if (!(per_second > 0)) throw ConfigError("rate limit must be positive");
  // r events per second, expressed as an integer budget over a window.
  if (per_second >= 1.0) {
    max_events_ = static_cast<std::size_t>(std::floor(per_second));
    window_ = std::chrono::seconds(1);
  } else {
    max_events_ = 1;
    window_ = std::chrono::duration_cast<std::chrono::steady_clock::duration>(
        std::chrono::duration<double>(1.0 / per_second));
  }
  window_ += margin;
}

void RateLimiter::acquire() {
  std::lock_guard lock(mu_);
  auto now = std::chrono::steady_clock::now();
  if (admitted_.size() >= max_events_) {
    const auto earliest = admitted_.front() + window_;
    if (now < earliest) {
      std::this_thread::sleep_until(earliest);
      now = std::chrono::steady_clock::now();
    }
    admitted_.pop_front();
  }
  admitted_.push_back(now);
}

ResponseCache::ResponseCache(std::optional<std::filesystem::path> path) {
  if (!path) return;
  if (std::filesystem::exists(*path)) {
    std::ifstream in(*path);
    std::string line;
    while (std::getline(in, line)) {
      if (line.empty()) continue;
      try {
        const auto j = nlohmann::json::parse(line);
        Entry e{j.at("text").get<std::string>(), j.value("input_tokens", std::int64_t{0}),
                j.value("output_tokens", std::int64_t{0})};
        entries_.emplace(j.at("key").get<std::string>(), std::move(e));
      } catch (const nlohmann::json::exception&) {
        // A torn final line from a crash; everything before it is intact.
        continue;
      }
    }
  } else if (path->has_parent_path()) {
    std::filesystem::create_directories(path->parent_path());
  }
  file_.emplace(*path, std::ios::app | std::ios::binary);
  if (!*file_) throw IoError("cannot open cache file '" + path->string() + "'");
}

std::optional<ResponseCache::Entry> ResponseCache::lookup(const std::string& key) const {
  std::lock_guard lock(mu_);
  auto it = entries_.find(key);
  if (it == entries_.end()) return std::nullopt;
  return it->second;
}

void ResponseCache::store(const std::string& key, const Entry& entry) {
  std::lock_guard lock(mu_);
  if (!entries_.emplace(key, entry).second) return;
  if (file_) {
    *file_ << nlohmann::json{{"key", key},
                             {"text", entry.text},
                             {"input_tokens", entry.input_tokens},
                             {"output_tokens", entry.output_tokens}}
                  .dump()
           << '\n';
    file_->flush();
  }
}

std::size_t ResponseCache::size() const {
  std::lock_guard lock(mu_);
  return entries_.size();
}

std::string cache_key(const std::string& backend_id, const ChatRequest& request) {
  const nlohmann::json material = {
      backend_id,
      request.params.model_name,
      request.params.max_tokens,
      request.params.temperature,
      request.system ? nlohmann::json(*request.system) : nlohmann::json(nullptr),
      request.user,
  };
  return sha256_hex(material.dump());
}

ChatClient::ChatClient(std::shared_ptr<ChatBackend> backend, ClientOptions options)
    : backend_(std::move(backend)),
      options_(std::move(options)),
      cache_(options_.cache_enabled ? options_.cache_path : std::nullopt),
      rng_(options_.seed) {
  if (!backend_) throw ConfigError("chat client needs a backend");
  if (options_.retry.max_attempts < 1) throw ConfigError("max_attempts must be at least 1");
  if (options_.rate_limit_per_second > 0) {
    limiter_ = std::make_unique<RateLimiter>(options_.rate_limit_per_second);
  }
  if (!options_.sleep) {
    options_.sleep = [](std::chrono::milliseconds d) { std::this_thread::sleep_for(d); };
  }
}

std::chrono::milliseconds ChatClient::backoff_delay(int failed_attempt) {
  double factor = 1.0;
  if (options_.retry.jitter > 0) {
    std::lock_guard lock(mu_);
    std::uniform_real_distribution<double> dist(-options_.retry.jitter, options_.retry.jitter);
    factor += dist(rng_);
  }
  const double base = static_cast<double>(options_.retry.base_delay.count()) *
                      std::ldexp(1.0, failed_attempt);
  return std::chrono::milliseconds(static_cast<std::int64_t>(std::llround(base * factor)));
}

ChatResponse ChatClient::complete(const ChatRequest& request) {
  if (request.user.empty()) throw ArgumentError("chat request has an empty user message");

  const std::string key = cache_key(backend_->id(), request);
  if (options_.cache_enabled) {
    if (auto hit = cache_.lookup(key)) {
      ++cache_hits_;
      ChatResponse response{hit->text, hit->input_tokens, hit->output_tokens, true, 0, 0};
      std::lock_guard lock(mu_);
      usage_.add(request.task_tag, response.input_tokens, response.output_tokens);
      return response;
    }
  }

  const auto started = std::chrono::steady_clock::now();
  BackendReply reply;
  int attempt = 0;
  for (;;) {
    ++attempt;
    if (limiter_) limiter_->acquire();
    ++live_dispatches_;
    reply = backend_->send(request);
    if (reply.status == 200) break;
    if (!RetryPolicy::retryable(reply.status)) {
      throw RequestError("backend rejected request with status " + std::to_string(reply.status) +
                             (reply.error.empty() ? "" : ": " + reply.error),
                         reply.status);
    }
    if (attempt >= options_.retry.max_attempts) {
      throw TransportError("gave up after " + std::to_string(attempt) + " attempts, last status " +
                               std::to_string(reply.status) +
                               (reply.error.empty() ? "" : ": " + reply.error),
                           reply.status, attempt);
    }
    options_.sleep(backoff_delay(attempt - 1));
  }

  ChatResponse response;
  response.text = std::move(reply.text);
  response.input_tokens = reply.input_tokens;
  response.output_tokens = reply.output_tokens;
  response.cached = false;
  response.attempts = attempt;
  response.latency_ms = std::chrono::duration_cast<std::chrono::milliseconds>(
                            std::chrono::steady_clock::now() - started)
                            .count();
  if (options_.cache_enabled) {
    cache_.store(key, {response.text, response.input_tokens, response.output_tokens});
  }
  std::lock_guard lock(mu_);
  usage_.add(request.task_tag, response.input_tokens, response.output_tokens);
  return response;
}

UsageLedger ChatClient::usage() const {
  std::lock_guard lock(mu_);
  return usage_;
}

}  // namespace detox
