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

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace detox {

enum class TaskKind { Paraphrase, ParaphraseFallback, ContentCheck, ToxicityCheck };

std::string_view to_string(TaskKind kind);
TaskKind task_kind_from_string(std::string_view name);

// Slots a task's user template must contain, each exactly once.
std::vector<std::string> required_slots(TaskKind kind);

struct RenderedPrompt {
  std::optional<std::string> system;
  std::string user;
};

// A prompt stored as an editable text file:
//
//   ---
//   task: content_check
//   version: content-check-v1
//   slots: toxic, detox
//   ---
//   [system]
//   optional system text
//   [user]
//   Original: {toxic}
//   Rewrite: {detox}
//
class PromptTemplate {
 public:
  PromptTemplate(TaskKind task, std::string version, std::optional<std::string> system,
                 std::string user_template);

  static PromptTemplate parse(std::string_view file_contents);
  static PromptTemplate load(const std::filesystem::path& path);
  std::string serialize() const;

  // Single left-to-right pass: slot values are inserted verbatim and never
  // rescanned. Throws ArgumentError if a required slot value is missing.
  RenderedPrompt render(const std::map<std::string, std::string>& values) const;

  TaskKind task() const { return task_; }
  const std::string& version() const { return version_; }
  const std::optional<std::string>& system() const { return system_; }
  const std::string& user_template() const { return user_template_; }

 private:
  TaskKind task_;
  std::string version_;
  std::optional<std::string> system_;
  std::string user_template_;
};

struct PromptSet {
  PromptTemplate paraphrase;
  PromptTemplate fallback;
  PromptTemplate content_check;
  PromptTemplate toxicity_check;

  static PromptSet defaults();
  const PromptTemplate& get(TaskKind kind) const;
};

PromptTemplate default_prompt(TaskKind kind);

}  // namespace detox
