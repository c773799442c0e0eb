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

#include "detox/annotator.hpp"

#include "detox/error.hpp"
#include "detox/text_util.hpp"

namespace detox {

void to_json(nlohmann::json& j, const Attempt& a) {
  j = nlohmann::json{{"task", a.task},
                     {"variant", a.variant},
                     {"outcome", a.outcome},
                     {"input_tokens", a.input_tokens},
                     {"output_tokens", a.output_tokens},
                     {"cached", a.cached}};
}

void from_json(const nlohmann::json& j, Attempt& a) {
  j.at("task").get_to(a.task);
  j.at("variant").get_to(a.variant);
  j.at("outcome").get_to(a.outcome);
  a.input_tokens = j.value("input_tokens", std::int64_t{0});
  a.output_tokens = j.value("output_tokens", std::int64_t{0});
  a.cached = j.value("cached", false);
}

void to_json(nlohmann::json& j, const Verdict& v) {
  j = nlohmann::json{{"value", v.yes() ? "yes" : "no"}, {"raw", v.raw}};
}

void from_json(const nlohmann::json& j, Verdict& v) {
  const auto value = j.at("value").get<std::string>();
  if (value != "yes" && value != "no") throw ProtocolError("bad verdict value '" + value + "'");
  v.value = value == "yes" ? VerdictValue::Yes : VerdictValue::No;
  v.raw = j.value("raw", std::string());
}

std::optional<VerdictValue> parse_verdict(std::string_view raw) {
  const std::string lowered = to_lower_ascii(raw);
  std::size_t i = 0;
  while (i < lowered.size() && (is_ascii_space(lowered[i]) || is_ascii_punct(lowered[i]))) ++i;
  std::size_t j = i;
  while (j < lowered.size() && lowered[j] >= 'a' && lowered[j] <= 'z') ++j;
  const std::string_view word = std::string_view(lowered).substr(i, j - i);
  if (word == "yes") return VerdictValue::Yes;
  if (word == "no") return VerdictValue::No;
  return std::nullopt;
}

const std::vector<std::string>& default_refusal_patterns() {
  static const std::vector<std::string> kPatterns{
      "sorry, i can", "i cannot assist", "i can't assist", "i'm unable to", "as an ai",
  };
  return kPatterns;
}

namespace {

// Lowercase ASCII and fold U+2019 (right single quotation mark) to '.
std::string fold_for_matching(std::string_view s) {
  std::string out;
  out.reserve(s.size());
  for (std::size_t i = 0; i < s.size(); ++i) {
    if (s.compare(i, 3, "\xE2\x80\x99") == 0) {
      out.push_back('\'');
      i += 2;
      continue;
    }
    char c = s[i];
    if (c >= 'A' && c <= 'Z') c = static_cast<char>(c - 'A' + 'a');
    out.push_back(c);
  }
  return out;
}

}  // namespace

bool detect_refusal(std::string_view completion, const std::vector<std::string>& patterns) {
  if (trim(completion).empty()) return true;
  const std::string folded = fold_for_matching(completion);
  for (const auto& pattern : patterns) {
    if (pattern.empty()) continue;
    if (folded.find(fold_for_matching(pattern)) != std::string::npos) return true;
  }
  return false;
}

bool detect_refusal(std::string_view completion) {
  return detect_refusal(completion, default_refusal_patterns());
}

std::string strip_completion(std::string_view completion) {
  static constexpr std::pair<std::string_view, std::string_view> kQuotePairs[] = {
      {"\"", "\""}, {"'", "'"}, {"\xE2\x80\x9C", "\xE2\x80\x9D"}, {"\xE2\x80\x98", "\xE2\x80\x99"}};
  std::string_view s = trim(completion);
  bool stripped = true;
  while (stripped) {
    stripped = false;
    for (const auto& [open, close] : kQuotePairs) {
      if (s.size() >= open.size() + close.size() && s.substr(0, open.size()) == open &&
          s.substr(s.size() - close.size()) == close) {
        s = trim(s.substr(open.size(), s.size() - open.size() - close.size()));
        stripped = true;
        break;
      }
    }
  }
  return std::string(s);
}

const Verdict& VerdictResult::value() const {
  if (!verdict) throw VerdictError("no parseable Yes/No verdict after re-ask");
  return *verdict;
}

Annotator::Annotator(ChatClient& client, PromptSet prompts, AnnotatorOptions options)
    : client_(client), prompts_(std::move(prompts)), options_(std::move(options)) {}

ParaphraseResult Annotator::task1_paraphrase(const CleanSample& sample, Variant variant) const {
  if (sample.text.empty()) throw ArgumentError("sample '" + sample.id + "' has empty text");
  const bool fallback = variant == Variant::Fallback;
  const auto& tmpl = fallback ? prompts_.fallback : prompts_.paraphrase;
  const auto prompt = tmpl.render({{"text", sample.text}});

  ChatRequest request{prompt.system, prompt.user, options_.params.paraphrase, "paraphrase"};
  const ChatResponse response = client_.complete(request);

  ParaphraseResult result;
  result.raw = response.text;
  result.text = strip_completion(response.text);
  const bool refused = result.text.empty() || is_refusal(response.text);
  result.kind = refused ? ParaphraseResult::Kind::Refusal : ParaphraseResult::Kind::Paraphrase;
  if (refused) result.text.clear();
  result.attempt = Attempt{"paraphrase",
                           fallback ? "fallback" : "primary",
                           refused ? "refusal" : "paraphrase",
                           response.input_tokens,
                           response.output_tokens,
                           response.cached};
  return result;
}

VerdictResult Annotator::ask_verdict(const RenderedPrompt& prompt, const ModelParams& params,
                                     const std::string& task) const {
  VerdictResult result;
  for (int round = 0; round < 2; ++round) {
    ChatRequest request{prompt.system, prompt.user, params, task};
    if (round == 1) request.user += kReaskSuffix;
    const ChatResponse response = client_.complete(request);
    const auto parsed = parse_verdict(response.text);
    std::string outcome = "unparseable";
    if (parsed) outcome = *parsed == VerdictValue::Yes ? "yes" : "no";
    result.attempts.push_back(Attempt{task, round == 0 ? "ask" : "reask", outcome,
                                      response.input_tokens, response.output_tokens,
                                      response.cached});
    if (parsed) {
      result.verdict = Verdict{*parsed, response.text};
      break;
    }
  }
  return result;
}

VerdictResult Annotator::task2_content_check(std::string_view toxic, std::string_view detox) const {
  if (toxic.empty() || detox.empty()) throw ArgumentError("content check needs two non-empty texts");
  const auto prompt =
      prompts_.content_check.render({{"toxic", std::string(toxic)}, {"detox", std::string(detox)}});
  return ask_verdict(prompt, options_.params.content_check, "content_check");
}

VerdictResult Annotator::task3_toxicity_check(std::string_view detox) const {
  if (detox.empty()) throw ArgumentError("toxicity check needs a non-empty text");
  const auto prompt = prompts_.toxicity_check.render({{"text", std::string(detox)}});
  return ask_verdict(prompt, options_.params.toxicity_check, "toxicity_check");
}

}  // namespace detox
