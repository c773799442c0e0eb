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

#include "detox/prompts.hpp"

#include <fstream>
#include <sstream>

#include "detox/error.hpp"
#include "detox/text_util.hpp"

namespace detox {

std::string_view to_string(TaskKind kind) {
  switch (kind) {
    case TaskKind::Paraphrase:
      return "paraphrase";
    case TaskKind::ParaphraseFallback:
      return "paraphrase_fallback";
    case TaskKind::ContentCheck:
      return "content_check";
    case TaskKind::ToxicityCheck:
      return "toxicity_check";
  }
  return "unknown";
}

TaskKind task_kind_from_string(std::string_view name) {
  for (auto kind : {TaskKind::Paraphrase, TaskKind::ParaphraseFallback, TaskKind::ContentCheck,
                    TaskKind::ToxicityCheck}) {
    if (to_string(kind) == name) return kind;
  }
  throw ConfigError("unknown prompt task '" + std::string(name) + "'");
}

std::vector<std::string> required_slots(TaskKind kind) {
  if (kind == TaskKind::ContentCheck) return {"toxic", "detox"};
  return {"text"};
}

namespace {

std::size_t count_occurrences(std::string_view haystack, std::string_view needle) {
  std::size_t n = 0;
  for (auto pos = haystack.find(needle); pos != std::string_view::npos;
       pos = haystack.find(needle, pos + needle.size())) {
    ++n;
  }
  return n;
}

std::string strip_blank_lines(std::string_view s) {
  std::size_t b = 0;
  while (b < s.size() && (s[b] == '\n' || s[b] == '\r')) ++b;
  std::size_t e = s.size();
  while (e > b && (s[e - 1] == '\n' || s[e - 1] == '\r' || s[e - 1] == ' ')) --e;
  return std::string(s.substr(b, e - b));
}

}  // namespace

PromptTemplate::PromptTemplate(TaskKind task, std::string version,
                               std::optional<std::string> system, std::string user_template)
    : task_(task),
      version_(std::move(version)),
      system_(std::move(system)),
      user_template_(std::move(user_template)) {
  if (version_.empty()) throw ConfigError("prompt template needs a version");
  if (user_template_.empty()) throw ConfigError("prompt template has an empty user part");
  for (const auto& slot : required_slots(task_)) {
    const auto n = count_occurrences(user_template_, "{" + slot + "}");
    if (n != 1) {
      throw ConfigError("slot {" + slot + "} must appear exactly once in the " +
                        std::string(to_string(task_)) + " template, found " + std::to_string(n));
    }
  }
}

PromptTemplate PromptTemplate::parse(std::string_view contents) {
  std::istringstream in{std::string(contents)};
  std::string line;
  if (!std::getline(in, line) || trim(line) != "---") {
    throw ConfigError("prompt file must start with a '---' front-matter line");
  }
  std::map<std::string, std::string> meta;
  bool closed = false;
  while (std::getline(in, line)) {
    if (trim(line) == "---") {
      closed = true;
      break;
    }
    const auto colon = line.find(':');
    if (colon == std::string::npos) throw ConfigError("bad front-matter line: '" + line + "'");
    meta[std::string(trim(std::string_view(line).substr(0, colon)))] =
        std::string(trim(std::string_view(line).substr(colon + 1)));
  }
  if (!closed) throw ConfigError("unterminated prompt front matter");
  for (const char* key : {"task", "version"}) {
    if (!meta.contains(key)) throw ConfigError(std::string("prompt front matter lacks '") + key + "'");
  }
  const TaskKind task = task_kind_from_string(meta["task"]);
  if (meta.contains("slots")) {
    std::vector<std::string> declared;
    std::string slots = meta["slots"];
    for (auto& c : slots) {
      if (c == ',') c = ' ';
    }
    declared = split_whitespace(slots);
    if (declared != required_slots(task)) {
      throw ConfigError("declared slots '" + meta["slots"] + "' do not match task " +
                        std::string(to_string(task)));
    }
  }

  std::string system_text;
  std::string user_text;
  std::string* section = nullptr;
  bool has_system = false;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t == "[system]") {
      section = &system_text;
      has_system = true;
      continue;
    }
    if (t == "[user]") {
      section = &user_text;
      continue;
    }
    if (section == nullptr) {
      if (t.empty()) continue;
      throw ConfigError("prompt text outside a [system]/[user] section");
    }
    *section += line;
    *section += '\n';
  }
  std::optional<std::string> system;
  if (has_system) system = strip_blank_lines(system_text);
  return PromptTemplate(task, meta["version"], std::move(system), strip_blank_lines(user_text));
}

PromptTemplate PromptTemplate::load(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open prompt file '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  return parse(buf.str());
}

std::string PromptTemplate::serialize() const {
  std::string slots;
  for (const auto& s : required_slots(task_)) {
    if (!slots.empty()) slots += ", ";
    slots += s;
  }
  std::string out = "---\ntask: " + std::string(to_string(task_)) + "\nversion: " + version_ +
                    "\nslots: " + slots + "\n---\n";
  if (system_) out += "[system]\n" + *system_ + "\n";
  out += "[user]\n" + user_template_ + "\n";
  return out;
}

RenderedPrompt PromptTemplate::render(const std::map<std::string, std::string>& values) const {
  const auto slots = required_slots(task_);
  for (const auto& slot : slots) {
    if (!values.contains(slot)) throw ArgumentError("missing value for slot {" + slot + "}");
  }
  std::string out;
  out.reserve(user_template_.size() + 256);
  std::size_t i = 0;
  while (i < user_template_.size()) {
    bool substituted = false;
    if (user_template_[i] == '{') {
      for (const auto& slot : slots) {
        const std::string token = "{" + slot + "}";
        if (user_template_.compare(i, token.size(), token) == 0) {
          out += values.at(slot);
          i += token.size();
          substituted = true;
          break;
        }
      }
    }
    if (!substituted) out.push_back(user_template_[i++]);
  }
  return RenderedPrompt{system_, std::move(out)};
}

namespace {

constexpr std::string_view kParaphraseUser =
    R"(Rewrite the following text so that it keeps the original meaning but no longer contains any toxic, offensive or hateful content. Keep mentions such as @USER and all numbers unchanged. Return only the rewritten text, without quotes or commentary.
Text: {text})";

constexpr std::string_view kFallbackSystem =
    R"(Your role is to promote respectful and constructive communication by transforming offensive, harmful, or toxic language into clear, empathetic, and inclusive speech while preserving the speaker’s core intent. Under no circumstances give personal comments to the text, it would destroy the translation system!)";

constexpr std::string_view kFallbackUser =
    R"(You are an advanced language model trained to foster constructive and inclusive dialogue. Your task is to take offensive, harmful, or toxic language—words, phrases, or expressions that demean, insult, or alienate—and reframe them into respectful, clear, and empathetic communication while preserving the speaker’s core intent. Below is a framework to guide your approach, inspired by the principles of respectful communication:
Background: Human connection thrives on language, but offensive speech can fracture relationships and communities. Linguistic research, starting in the 20th century with scholars like Deborah Tannen, revealed how word choice shapes social dynamics. Today, tools like AI filters and communication techniques help transform harmful language into constructive dialogue, promoting unity and understanding.
Objective: When given offensive input (e.g., insults, slurs, or aggressive phrasing), analyze the underlying message or emotion, then rephrase it to be respectful, inclusive, and constructive. Under no circumstances give personal comments to the text or express your opinion, don't answer like: !
Translate the following text into a neutral, non-offensive version while preserving its core meaning and intent. Maintain any mentions of users (e.g., @USER) and keep all numbers exactly as they appear in the original text. Do not add any commentary, disclaimers, or explanations—only return the transformed text. Text: {text})";

constexpr std::string_view kContentCheckUser =
    R"(Do these two texts have the same meaning, ignoring differences in tone and offensiveness? Answer with "Yes" or "No" only.
Original: {toxic}
Rewrite: {detox})";

constexpr std::string_view kToxicityCheckUser =
    R"(Does the following text contain toxic, offensive or hateful content? Answer with "Yes" or "No" only.
Text: {text})";

}  // namespace

PromptTemplate default_prompt(TaskKind kind) {
  switch (kind) {
    case TaskKind::Paraphrase:
      return PromptTemplate(kind, "paraphrase-v1", std::nullopt, std::string(kParaphraseUser));
    case TaskKind::ParaphraseFallback:
      return PromptTemplate(kind, "paraphrase-fallback-v1", std::string(kFallbackSystem),
                            std::string(kFallbackUser));
    case TaskKind::ContentCheck:
      return PromptTemplate(kind, "content-check-v1", std::nullopt,
                            std::string(kContentCheckUser));
    case TaskKind::ToxicityCheck:
      return PromptTemplate(kind, "toxicity-check-v1", std::nullopt,
                            std::string(kToxicityCheckUser));
  }
  throw ConfigError("unknown prompt task");
}

PromptSet PromptSet::defaults() {
  return PromptSet{default_prompt(TaskKind::Paraphrase),
                   default_prompt(TaskKind::ParaphraseFallback),
                   default_prompt(TaskKind::ContentCheck),
                   default_prompt(TaskKind::ToxicityCheck)};
}

const PromptTemplate& PromptSet::get(TaskKind kind) const {
  switch (kind) {
    case TaskKind::Paraphrase:
      return paraphrase;
    case TaskKind::ParaphraseFallback:
      return fallback;
    case TaskKind::ContentCheck:
      return content_check;
    case TaskKind::ToxicityCheck:
      return toxicity_check;
  }
  throw ConfigError("unknown prompt task");
}

}  // namespace detox
