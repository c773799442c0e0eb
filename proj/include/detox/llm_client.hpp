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

#include <atomic>
#include <chrono>
#include <cstdint>
#include <deque>
#include <filesystem>
#include <fstream>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <random>
#include <string>
#include <unordered_map>
#include <vector>

#include <nlohmann/json.hpp>

namespace detox {

struct ModelParams {
  std::string model_name = "gpt-4o-mini";
  int max_tokens = 256;
  double temperature = 0.6;

  void validate() const;
  bool operator==(const ModelParams&) const = default;
};

void to_json(nlohmann::json& j, const ModelParams& p);
void from_json(const nlohmann::json& j, ModelParams& p);

struct ChatRequest {
  std::optional<std::string> system;
  std::string user;
  ModelParams params;
  std::string task_tag;  // ledger bucket; not part of the cache key
};

struct ChatResponse {
  std::string text;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  bool cached = false;
  std::int64_t latency_ms = 0;
  int attempts = 0;  // live dispatches made for this response; 0 on a cache hit
};

struct TokenCount {
  std::int64_t input = 0;
  std::int64_t output = 0;
  bool operator==(const TokenCount&) const = default;
};

// Totals always equal the sum over per_task.
class UsageLedger {
 public:
  void add(const std::string& task, std::int64_t input, std::int64_t output);
  void merge(const UsageLedger& other);

  std::int64_t total_input_tokens() const { return total_.input; }
  std::int64_t total_output_tokens() const { return total_.output; }
  const std::map<std::string, TokenCount>& per_task() const { return per_task_; }

  bool operator==(const UsageLedger&) const = default;

 private:
  TokenCount total_;
  std::map<std::string, TokenCount> per_task_;
};

void to_json(nlohmann::json& j, const UsageLedger& ledger);
void from_json(const nlohmann::json& j, UsageLedger& ledger);

// Dollar prices per million tokens.
struct Pricing {
  double input_per_million = 0.0;
  double output_per_million = 0.0;
};

void to_json(nlohmann::json& j, const Pricing& p);
void from_json(const nlohmann::json& j, Pricing& p);

struct CostEstimate {
  double input = 0.0;
  double output = 0.0;
  double total = 0.0;

  // Rounded to 3 decimals, e.g. "$2.873".
  std::string display() const;
  double rounded() const;
};

CostEstimate estimate_cost(const UsageLedger& ledger, const Pricing& pricing);

// What a backend reports for one dispatch. status 0 stands for a timeout or
// connection failure, 200 for success; anything else is the HTTP status.
struct BackendReply {
  int status = 200;
  std::string text;
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  std::string error;
};

class ChatBackend {
 public:
  virtual ~ChatBackend() = default;
  // Stable identity; participates in the cache key.
  virtual std::string id() const = 0;
  // Throws ProtocolError on a malformed payload and RequestError when the
  // request can never succeed (e.g. no credential).
  virtual BackendReply send(const ChatRequest& request) = 0;
};

// POST {base}/chat/completions against any OpenAI-compatible server.
class OpenAiBackend : public ChatBackend {
 public:
  OpenAiBackend(std::string base_url, std::string api_key,
                std::chrono::seconds timeout = std::chrono::seconds(60));

  std::string id() const override;
  BackendReply send(const ChatRequest& request) override;

  static nlohmann::json build_body(const ChatRequest& request);
  // Throws ProtocolError if choices[0].message.content is missing.
  static BackendReply parse_body(const std::string& body);

 private:
  std::string base_url_;
  std::string api_key_;
  std::chrono::seconds timeout_;
};

struct RetryPolicy {
  int max_attempts = 5;
  std::chrono::milliseconds base_delay{1000};
  double jitter = 0.2;  // delay is scaled by a factor in [1 - jitter, 1 + jitter]

  static bool retryable(int status) { return status == 0 || status == 429 || status >= 500; }
};

// Admits at most max_events in any window of `window` length, measured on
// the steady clock at admission time. A small margin absorbs the gap
// between admission and the actual send.
class RateLimiter {
 public:
  RateLimiter(double per_second, std::chrono::milliseconds margin = std::chrono::milliseconds(10));
  void acquire();

 private:
  std::size_t max_events_;
  std::chrono::steady_clock::duration window_;
  std::mutex mu_;
  std::deque<std::chrono::steady_clock::time_point> admitted_;
};

struct ClientOptions {
  RetryPolicy retry;
  double rate_limit_per_second = 0.0;  // 0 disables limiting
  std::optional<std::filesystem::path> cache_path;
  bool cache_enabled = true;
  std::uint64_t seed = 0;  // jitter RNG
  std::function<void(std::chrono::milliseconds)> sleep;  // defaults to this_thread::sleep_for
};

// Cache file: one JSON object per line {key, text, input_tokens,
// output_tokens}; later lines for the same key are ignored.
class ResponseCache {
 public:
  explicit ResponseCache(std::optional<std::filesystem::path> path);

  struct Entry {
    std::string text;
    std::int64_t input_tokens = 0;
    std::int64_t output_tokens = 0;
  };

  std::optional<Entry> lookup(const std::string& key) const;
  void store(const std::string& key, const Entry& entry);
  std::size_t size() const;

 private:
  mutable std::mutex mu_;
  std::unordered_map<std::string, Entry> entries_;
  std::optional<std::ofstream> file_;
};

std::string cache_key(const std::string& backend_id, const ChatRequest& request);

// Thread-safe chat client: cache, retries with exponential backoff, rate
// limiting and token metering around a ChatBackend.
class ChatClient {
 public:
  ChatClient(std::shared_ptr<ChatBackend> backend, ClientOptions options = {});

  // Throws TransportError when the attempt cap is hit on transient failures,
  // RequestError on non-retryable statuses, ProtocolError on bad payloads.
  ChatResponse complete(const ChatRequest& request);

  UsageLedger usage() const;
  std::size_t live_dispatches() const { return live_dispatches_.load(); }
  std::size_t cache_hits() const { return cache_hits_.load(); }
  const ChatBackend& backend() const { return *backend_; }

 private:
  std::chrono::milliseconds backoff_delay(int failed_attempt);

  std::shared_ptr<ChatBackend> backend_;
  ClientOptions options_;
  ResponseCache cache_;
  std::unique_ptr<RateLimiter> limiter_;

  mutable std::mutex mu_;
  UsageLedger usage_;
  std::mt19937_64 rng_;

  std::atomic<std::size_t> live_dispatches_{0};
  std::atomic<std::size_t> cache_hits_{0};
};

}  // namespace detox
