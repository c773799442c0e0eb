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

#include "detox/evalharness.hpp"

#include <algorithm>
#include <fstream>

#include "detox/error.hpp"
#include "detox/text_util.hpp"

namespace detox {

void to_json(nlohmann::json& j, const SampleEval& s) {
  j = nlohmann::json{{"id", s.id},       {"style", s.style},     {"non_toxic", s.non_toxic},
                     {"sim", s.sim},     {"fluency", s.fluency}, {"fluent", s.fluent}};
}

void to_json(nlohmann::json& j, const EvalReport& r) {
  j = nlohmann::json{{"style_accuracy", r.style_accuracy},
                     {"content_preservation", r.content_preservation},
                     {"fluency", r.fluency},
                     {"bleu", r.bleu},
                     {"n", r.n}};
}

void check_alignment(std::size_t items, std::size_t references) {
  if (items == references) return;
  const std::size_t line = std::min(items, references) + 1;
  throw ArgumentError("outputs and references are misaligned at line " + std::to_string(line) +
                      " (" + std::to_string(items) + " outputs, " + std::to_string(references) +
                      " references)");
}

EvalReport evaluate(const std::vector<EvalItem>& items, const std::vector<std::string>& references,
                    Scorer& scorer, const EvalOptions& options) {
  check_alignment(items.size(), references.size());
  if (items.empty()) throw ArgumentError("nothing to evaluate");

  std::vector<std::string> outputs;
  std::vector<std::string> pair_texts;
  outputs.reserve(items.size());
  pair_texts.reserve(items.size() * 2);
  for (const auto& it : items) {
    outputs.push_back(it.output);
    pair_texts.push_back(it.toxic);
    pair_texts.push_back(it.output);
  }

  const auto style = scorer.score(outputs, ScoreKind::Style);
  validate_scores(style, outputs.size());
  const auto fluency = scorer.score(outputs, ScoreKind::Fluency);
  validate_scores(fluency, outputs.size());
  const auto vectors = scorer.embed(pair_texts, ProfileName::Evaluation);
  validate_vectors(vectors, pair_texts.size(), options.evaluation_dimension);

  EvalReport report;
  report.n = items.size();
  double style_sum = 0, sim_sum = 0, fluent_sum = 0;
  for (std::size_t i = 0; i < items.size(); ++i) {
    SampleEval s;
    s.id = items[i].id;
    s.style = style[i];
    s.non_toxic = style[i] <= options.style_threshold;
    s.fluency = fluency[i];
    s.fluent = fluency[i] > options.fluency_threshold;
    s.sim = cosine_similarity(vectors[2 * i], vectors[2 * i + 1]);
    style_sum += s.non_toxic ? 1.0 : 0.0;
    fluent_sum += s.fluent ? 1.0 : 0.0;
    sim_sum += s.sim;
    report.per_sample.push_back(std::move(s));
  }
  const double n = static_cast<double>(items.size());
  report.style_accuracy = style_sum / n;
  report.fluency = fluent_sum / n;
  report.content_preservation = sim_sum / n;
  report.bleu = corpus_bleu(outputs, references);
  return report;
}

std::string baseline_duplicate(std::string_view toxic) { return std::string(toxic); }

Lexicon load_lexicon(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("cannot read lexicon '" + path.string() + "'");
  Lexicon lex;
  std::string line;
  while (std::getline(in, line)) {
    const auto t = trim(line);
    if (t.empty() || t.front() == '#') continue;
    lex.insert(to_lower_ascii(t));
  }
  return lex;
}

namespace {

std::string_view strip_punct(std::string_view s) {
  std::size_t b = 0, e = s.size();
  while (b < e && is_ascii_punct(s[b])) ++b;
  while (e > b && is_ascii_punct(s[e - 1])) --e;
  return s.substr(b, e - b);
}

}  // namespace

std::string baseline_delete(std::string_view toxic, const Lexicon& lexicon) {
  std::string out;
  for (const auto& token : split_whitespace(toxic)) {
    const std::string lower = to_lower_ascii(token);
    const std::string bare(strip_punct(lower));
    if (lexicon.count(lower) > 0 || (!bare.empty() && lexicon.count(bare) > 0)) continue;
    if (!out.empty()) out += ' ';
    out += token;
  }
  return out;
}

namespace {

std::vector<std::string> read_lines(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  std::vector<std::string> lines;
  std::string line;
  while (std::getline(in, line)) {
    if (!line.empty() && line.back() == '\r') line.pop_back();
    lines.push_back(std::move(line));
  }
  return lines;
}

}  // namespace

std::vector<EvalItem> read_eval_items(const std::filesystem::path& path, bool toxic_only) {
  const auto lines = read_lines(path);
  std::vector<EvalItem> items;
  items.reserve(lines.size());
  for (std::size_t i = 0; i < lines.size(); ++i) {
    const auto& line = lines[i];
    const auto tab = line.find('\t');
    EvalItem item;
    item.id = std::to_string(i + 1);
    if (tab == std::string::npos) {
      if (!toxic_only) {
        throw ArgumentError(path.string() + " line " + std::to_string(i + 1) +
                            ": expected two tab-separated columns");
      }
      item.toxic = line;
    } else {
      if (line.find('\t', tab + 1) != std::string::npos) {
        throw ArgumentError(path.string() + " line " + std::to_string(i + 1) +
                            ": more than two columns");
      }
      item.toxic = line.substr(0, tab);
      item.output = line.substr(tab + 1);
    }
    items.push_back(std::move(item));
  }
  return items;
}

std::vector<std::string> read_references(const std::filesystem::path& path) {
  return read_lines(path);
}

void write_eval_report(const std::filesystem::path& out_dir, const EvalReport& report) {
  std::filesystem::create_directories(out_dir);
  {
    std::ofstream out(out_dir / "eval_report.json", std::ios::binary | std::ios::trunc);
    if (!out) throw IoError("cannot write eval report under '" + out_dir.string() + "'");
    out << nlohmann::json(report).dump(2) << "\n";
  }
  std::ofstream out(out_dir / "eval_per_sample.jsonl", std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write per-sample file under '" + out_dir.string() + "'");
  for (const auto& s : report.per_sample) out << nlohmann::json(s).dump() << "\n";
}

}  // namespace detox
