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

#include "detox/error.hpp"
#include "detox/http_util.hpp"
#include "detox/llm_client.hpp"

namespace detox {

OpenAiBackend::OpenAiBackend(std::string base_url, std::string api_key,
                             std::chrono::seconds timeout)
    : base_url_(std::move(base_url)), api_key_(std::move(api_key)), timeout_(timeout) {
  while (!base_url_.empty() && base_url_.back() == '/') base_url_.pop_back();
}

std::string OpenAiBackend::id() const { return "openai:" + base_url_; }

nlohmann::json OpenAiBackend::build_body(const ChatRequest& request) {
  nlohmann::json messages = nlohmann::json::array();
  if (request.system) messages.push_back({{"role", "system"}, {"content", *request.system}});
  messages.push_back({{"role", "user"}, {"content", request.user}});
  return nlohmann::json{{"model", request.params.model_name},
                        {"messages", messages},
                        {"max_tokens", request.params.max_tokens},
                        {"temperature", request.params.temperature}};
}

BackendReply OpenAiBackend::parse_body(const std::string& body) {
  nlohmann::json j;
  try {
    j = nlohmann::json::parse(body);
  } catch (const nlohmann::json::parse_error& e) {
    throw ProtocolError(std::string("chat completion body is not JSON: ") + e.what());
  }
  BackendReply reply;
  try {
    const auto& content = j.at("choices").at(0).at("message").at("content");
    reply.text = content.is_null() ? std::string() : content.get<std::string>();
    if (j.contains("usage") && j["usage"].is_object()) {
      reply.input_tokens = j["usage"].value("prompt_tokens", std::int64_t{0});
      reply.output_tokens = j["usage"].value("completion_tokens", std::int64_t{0});
    }
  } catch (const nlohmann::json::exception& e) {
    throw ProtocolError(std::string("chat completion body lacks choices[0].message.content: ") +
                        e.what());
  }
  return reply;
}

BackendReply OpenAiBackend::send(const ChatRequest& request) {
  if (api_key_.empty()) throw RequestError("no API credential configured (set DETOX_API_KEY)");
  const auto url = split_url(base_url_);

  httplib::Client client(url.origin);
  client.set_connection_timeout(timeout_);
  client.set_read_timeout(timeout_);
  client.set_write_timeout(timeout_);
  client.set_bearer_token_auth(api_key_);

  auto res = client.Post(url.path + "/chat/completions", build_body(request).dump(),
                         "application/json");
  BackendReply reply;
  if (!res) {
    reply.status = 0;
    reply.error = httplib::to_string(res.error());
    return reply;
  }
  if (res->status != 200) {
    reply.status = res->status;
    reply.error = res->body.substr(0, 512);
    return reply;
  }
  reply = parse_body(res->body);
  reply.status = 200;
  return reply;
}

}  // namespace detox
