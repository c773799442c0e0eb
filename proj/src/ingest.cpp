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

#include "detox/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>
#include <unordered_set>

#include "detox/error.hpp"
#include "detox/text_util.hpp"

namespace detox {

void to_json(nlohmann::json& j, const CleanSample& s) {
  j = nlohmann::json{{"id", s.id},
                     {"source", s.source},
                     {"text", s.text},
                     {"original_text", s.original_text}};
}

void from_json(const nlohmann::json& j, CleanSample& s) {
  j.at("id").get_to(s.id);
  j.at("source").get_to(s.source);
  j.at("text").get_to(s.text);
  s.original_text = j.value("original_text", s.text);
}

void from_json(const nlohmann::json& j, ReaderSpec& spec) {
  const auto format = j.value("format", std::string("delimited"));
  if (format == "delimited") {
    spec.format = SourceFormat::Delimited;
  } else if (format == "records") {
    spec.format = SourceFormat::Records;
  } else {
    throw ConfigError("unknown reader format '" + format + "'");
  }
  spec.path = j.at("path").get<std::string>();
  spec.source = j.at("source").get<std::string>();
  if (j.contains("columns")) {
    const auto& c = j.at("columns");
    spec.columns.id = c.value("id", spec.columns.id);
    spec.columns.text = c.value("text", spec.columns.text);
    spec.columns.label = c.value("label", spec.columns.label);
  }
  if (j.contains("delimiter")) {
    const auto d = j.at("delimiter").get<std::string>();
    if (d == "\\t" || d == "tab") {
      spec.delimiter = '\t';
    } else if (d.size() == 1) {
      spec.delimiter = d[0];
    } else {
      throw ConfigError("delimiter must be a single character, got '" + d + "'");
    }
  }
}

void to_json(nlohmann::json& j, const ReaderSpec& spec) {
  j = nlohmann::json{
      {"format", spec.format == SourceFormat::Delimited ? "delimited" : "records"},
      {"path", spec.path.string()},
      {"source", spec.source},
      {"columns",
       {{"id", spec.columns.id},
        {"text", spec.columns.text},
        {"label", spec.columns.label}}},
      {"delimiter", std::string(1, spec.delimiter)}};
}

namespace {

struct DelimitedRecord {
  std::vector<std::string> fields;
  std::size_t line = 0;  // 1-based line the record starts on
};

// RFC 4180 style reader: quoted fields may contain the delimiter, doubled
// quotes and line breaks.
std::vector<DelimitedRecord> parse_delimited(const std::string& data, char delim) {
  std::vector<DelimitedRecord> records;
  DelimitedRecord current;
  std::string field;
  bool in_quotes = false;
  bool field_started = false;
  std::size_t line = 1;
  current.line = 1;

  auto end_field = [&] {
    current.fields.push_back(std::move(field));
    field.clear();
    field_started = false;
  };
  auto end_record = [&] {
    end_field();
    const bool blank = current.fields.size() == 1 && current.fields[0].empty();
    if (!blank) records.push_back(std::move(current));
    current = DelimitedRecord{};
    current.line = line;
  };

  for (std::size_t i = 0; i < data.size(); ++i) {
    const char c = data[i];
    if (in_quotes) {
      if (c == '"') {
        if (i + 1 < data.size() && data[i + 1] == '"') {
          field.push_back('"');
          ++i;
        } else {
          in_quotes = false;
        }
      } else {
        if (c == '\n') ++line;
        field.push_back(c);
      }
      continue;
    }
    if (c == '"' && !field_started) {
      in_quotes = true;
      field_started = true;
    } else if (c == delim) {
      end_field();
    } else if (c == '\r' && i + 1 < data.size() && data[i + 1] == '\n') {
      continue;
    } else if (c == '\n') {
      ++line;
      end_record();
    } else {
      field.push_back(c);
      field_started = true;
    }
  }
  if (field_started || !current.fields.empty() || !field.empty()) end_record();
  return records;
}

std::string read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::ostringstream buf;
  buf << in.rdbuf();
  if (in.bad()) throw IoError("read failed for '" + path.string() + "'");
  return buf.str();
}

std::string json_scalar_to_string(const nlohmann::json& v) {
  if (v.is_string()) return v.get<std::string>();
  if (v.is_null()) return {};
  return v.dump();
}

LoadResult load_delimited(const ReaderSpec& spec, const std::string& data) {
  auto records = parse_delimited(data, spec.delimiter);
  if (records.empty()) throw EmptySourceError("'" + spec.path.string() + "' has no header row");

  const auto& header = records.front().fields;
  auto column_index = [&](const std::string& name) {
    auto it = std::find(header.begin(), header.end(), name);
    if (it == header.end()) throw SchemaError(name, records.front().line);
    return static_cast<std::size_t>(it - header.begin());
  };
  const std::size_t id_col = column_index(spec.columns.id);
  const std::size_t text_col = column_index(spec.columns.text);
  const std::size_t label_col = column_index(spec.columns.label);

  if (records.size() == 1) throw EmptySourceError("'" + spec.path.string() + "' has no data rows");

  LoadResult result;
  for (std::size_t r = 1; r < records.size(); ++r) {
    const auto& rec = records[r];
    for (auto [col, name] : {std::pair{id_col, &spec.columns.id},
                             std::pair{text_col, &spec.columns.text},
                             std::pair{label_col, &spec.columns.label}}) {
      if (col >= rec.fields.size()) throw SchemaError(*name, rec.line);
    }
    RawPost post{rec.fields[id_col], spec.source, rec.fields[text_col], rec.fields[label_col]};
    if (trim(post.text).empty()) {
      ++result.skipped_empty;
      continue;
    }
    result.posts.push_back(std::move(post));
  }
  return result;
}

LoadResult load_records(const ReaderSpec& spec, const std::string& data) {
  LoadResult result;
  std::size_t rows = 0;
  std::size_t line_no = 0;
  std::istringstream in(data);
  std::string line;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    nlohmann::json obj;
    try {
      obj = nlohmann::json::parse(line);
    } catch (const nlohmann::json::parse_error& e) {
      throw IoError("malformed record at line " + std::to_string(line_no) + " of '" +
                    spec.path.string() + "': " + e.what());
    }
    if (!obj.is_object()) {
      throw IoError("line " + std::to_string(line_no) + " of '" + spec.path.string() +
                    "' is not a JSON object");
    }
    for (const auto* key : {&spec.columns.id, &spec.columns.text, &spec.columns.label}) {
      if (!obj.contains(*key)) throw SchemaError(*key, line_no);
    }
    ++rows;
    RawPost post{json_scalar_to_string(obj[spec.columns.id]), spec.source,
                 json_scalar_to_string(obj[spec.columns.text]),
                 json_scalar_to_string(obj[spec.columns.label])};
    if (trim(post.text).empty()) {
      ++result.skipped_empty;
      continue;
    }
    result.posts.push_back(std::move(post));
  }
  if (rows == 0) throw EmptySourceError("'" + spec.path.string() + "' has no records");
  return result;
}

}  // namespace

LoadResult load_source(const ReaderSpec& spec) {
  if (!std::filesystem::exists(spec.path)) {
    throw IoError("source file '" + spec.path.string() + "' does not exist");
  }
  const std::string data = read_file(spec.path);
  LoadResult result = spec.format == SourceFormat::Delimited ? load_delimited(spec, data)
                                                             : load_records(spec, data);
  std::unordered_set<std::string> seen;
  for (auto& post : result.posts) {
    if (post.id.empty()) {
      throw ArgumentError("empty id in '" + spec.path.string() + "'");
    }
    if (!seen.insert(post.id).second) {
      throw ArgumentError("duplicate id '" + post.id + "' in source '" + spec.source + "'");
    }
  }
  return result;
}

std::vector<RawPost> filter_hate(const std::vector<RawPost>& posts, const LabelPolicy& policy) {
  std::vector<RawPost> kept;
  for (const auto& post : posts) {
    auto it = policy.find(post.source);
    if (it == policy.end()) throw PolicyError("no label policy for source '" + post.source + "'");
    if (it->second.contains(post.label)) kept.push_back(post);
  }
  return kept;
}

NormalizedBatch normalize_posts(const std::vector<RawPost>& posts) {
  NormalizedBatch batch;
  batch.samples.reserve(posts.size());
  for (const auto& post : posts) {
    CleanSample sample{post.source + ":" + post.id, post.source, normalize(post.text), post.text};
    if (sample.text.empty()) {
      batch.degenerate_ids.push_back(sample.id);
      continue;
    }
    batch.samples.push_back(std::move(sample));
  }
  return batch;
}

DedupeResult dedupe(const std::vector<CleanSample>& samples) {
  DedupeResult result;
  std::unordered_set<std::string_view> seen;
  seen.reserve(samples.size());
  for (const auto& s : samples) {
    if (seen.insert(s.text).second) {
      result.samples.push_back(s);
    } else {
      ++result.duplicates;
    }
  }
  return result;
}

void write_samples(const std::filesystem::path& path, const std::vector<CleanSample>& samples) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  for (const auto& s : samples) out << nlohmann::json(s).dump() << '\n';
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

std::vector<CleanSample> read_samples(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<CleanSample> samples;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      samples.push_back(nlohmann::json::parse(line).get<CleanSample>());
    } catch (const nlohmann::json::exception& e) {
      throw IoError("bad sample at line " + std::to_string(line_no) + " of '" + path.string() +
                    "': " + e.what());
    }
  }
  return samples;
}

}  // namespace detox
