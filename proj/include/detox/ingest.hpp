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

#include <cstddef>
#include <filesystem>
#include <map>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

namespace detox {

struct RawPost {
  std::string id;
  std::string source;
  std::string text;
  std::string label;
};

struct CleanSample {
  std::string id;  // "<source>:<native id>"
  std::string source;
  std::string text;
  std::string original_text;

  bool operator==(const CleanSample&) const = default;
};

void to_json(nlohmann::json& j, const CleanSample& s);
void from_json(const nlohmann::json& j, CleanSample& s);

enum class SourceFormat { Delimited, Records };

struct ColumnMap {
  std::string id = "id";
  std::string text = "text";
  std::string label = "label";
};

// How to read one source corpus. Delimited files carry a header row.
struct ReaderSpec {
  SourceFormat format = SourceFormat::Delimited;
  std::filesystem::path path;
  std::string source;  // provenance tag stamped on every RawPost
  ColumnMap columns;
  char delimiter = ',';
};

void from_json(const nlohmann::json& j, ReaderSpec& spec);
void to_json(nlohmann::json& j, const ReaderSpec& spec);

struct LoadResult {
  std::vector<RawPost> posts;
  std::size_t skipped_empty = 0;
};

// Throws IoError, SchemaError (naming column and 1-based line) or
// EmptySourceError when no row could be parsed.
LoadResult load_source(const ReaderSpec& spec);

// source tag -> labels that count as hate speech for that source.
using LabelPolicy = std::map<std::string, std::set<std::string>>;

// Keeps posts whose label is allowed for their source, order preserved.
// Throws PolicyError for a source with no policy entry.
std::vector<RawPost> filter_hate(const std::vector<RawPost>& posts,
                                 const LabelPolicy& policy);

// Text normalization applied to every post before annotation:
//   1. whitespace-delimited tokens starting with http://, https:// or www.
//      are dropped;
//   2. @handles become @USER, <user> -> @USER, <number> -> @NUMBER, and
//      runs of @USER separated only by whitespace collapse to one;
//   3. HTML entities are decoded, control characters stripped, runs of the
//      same punctuation character longer than 3 cut to 3, whitespace
//      collapsed and trimmed.
// The three passes are repeated until the text stops changing, so the
// result is always a fixed point.
std::string normalize(std::string_view text);

// Decodes named (&amp; &lt; &gt; &quot; &apos; &nbsp;) and numeric
// (&#NN; &#xHH;) entities. Unknown entities are left verbatim.
std::string decode_html_entities(std::string_view text);

struct NormalizedBatch {
  std::vector<CleanSample> samples;
  std::vector<std::string> degenerate_ids;  // empty after normalization
};

NormalizedBatch normalize_posts(const std::vector<RawPost>& posts);

struct DedupeResult {
  std::vector<CleanSample> samples;
  std::size_t duplicates = 0;
};

// Exact match on normalized text; the first occurrence survives.
DedupeResult dedupe(const std::vector<CleanSample>& samples);

void write_samples(const std::filesystem::path& path,
                   const std::vector<CleanSample>& samples);
std::vector<CleanSample> read_samples(const std::filesystem::path& path);

}  // namespace detox
