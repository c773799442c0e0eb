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

#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "detox/ingest.hpp"
#include "detox/llm_client.hpp"
#include "detox/prompts.hpp"

namespace detox {

enum class Variant { Primary, Fallback };

// One LLM call made on behalf of a sample.
struct Attempt {
  std::string task;     // paraphrase | content_check | toxicity_check
  std::string variant;  // primary | fallback | ask | reask
  std::string outcome;  // paraphrase | refusal | yes | no | unparseable
  std::int64_t input_tokens = 0;
  std::int64_t output_tokens = 0;
  bool cached = false;

  bool operator==(const Attempt&) const = default;
};

void to_json(nlohmann::json& j, const Attempt& a);
void from_json(const nlohmann::json& j, Attempt& a);

enum class VerdictValue { Yes, No };

struct Verdict {
  VerdictValue value = VerdictValue::No;
  std::string raw;

  bool yes() const { return value == VerdictValue::Yes; }
  bool operator==(const Verdict&) const = default;
};

void to_json(nlohmann::json& j, const Verdict& v);
void from_json(const nlohmann::json& j, Verdict& v);

// Lowercases, drops leading punctuation and whitespace, then looks at the
// first word: "yes" or "no". Anything else is a parse failure (nullopt).
std::optional<VerdictValue> parse_verdict(std::string_view raw);

const std::vector<std::string>& default_refusal_patterns();

// True iff the completion is blank or contains any pattern, compared
// case-insensitively. Typographic apostrophes count as ASCII ones.
bool detect_refusal(std::string_view completion, const std::vector<std::string>& patterns);
bool detect_refusal(std::string_view completion);

// Trims whitespace and matching pairs of surrounding quotes.
std::string strip_completion(std::string_view completion);

struct ParaphraseResult {
  enum class Kind { Paraphrase, Refusal } kind = Kind::Refusal;
  std::string text;  // cleaned paraphrase; empty for a refusal
  std::string raw;   // completion as returned
  Attempt attempt;

  bool refused() const { return kind == Kind::Refusal; }
};

struct VerdictResult {
  std::optional<Verdict> verdict;  // empty when both asks were unparseable
  std::vector<Attempt> attempts;

  // Throws VerdictError when no verdict could be parsed.
  const Verdict& value() const;
};

struct TaskParams {
  ModelParams paraphrase;
  ModelParams content_check;
  ModelParams toxicity_check;
};

struct AnnotatorOptions {
  TaskParams params;
  std::vector<std::string> refusal_patterns = default_refusal_patterns();
};

// The three annotation tasks. Stateless apart from the client handle; safe
// to share between workers.
class Annotator {
 public:
  Annotator(ChatClient& client, PromptSet prompts, AnnotatorOptions options = {});

  ParaphraseResult task1_paraphrase(const CleanSample& sample, Variant variant) const;
  VerdictResult task2_content_check(std::string_view toxic, std::string_view detox) const;
  VerdictResult task3_toxicity_check(std::string_view detox) const;

  bool is_refusal(std::string_view completion) const {
    return detect_refusal(completion, options_.refusal_patterns);
  }

  const PromptSet& prompts() const { return prompts_; }
  const AnnotatorOptions& options() const { return options_; }

  static constexpr std::string_view kReaskSuffix = "\n\nAnswer with only \"Yes\" or \"No\".";

 private:
  VerdictResult ask_verdict(const RenderedPrompt& prompt, const ModelParams& params,
                            const std::string& task) const;

  ChatClient& client_;
  PromptSet prompts_;
  AnnotatorOptions options_;
};

}  // namespace detox
