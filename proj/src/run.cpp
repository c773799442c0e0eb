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

#include <algorithm>
#include <atomic>
#include <exception>
#include <fstream>
#include <mutex>
#include <thread>
#include <unordered_map>
#include <unordered_set>

#include "detox/error.hpp"
#include "detox/pipeline.hpp"

namespace detox {

namespace fs = std::filesystem;

namespace {

constexpr const char* kRunFile = "run.json";
constexpr const char* kSamplesFile = "samples.jsonl";
constexpr const char* kRecordsFile = "records.jsonl";

class CheckpointLog {
 public:
  CheckpointLog(const fs::path& path, bool append)
      : out_(path, append ? std::ios::app : std::ios::trunc) {
    if (!out_) throw IoError("cannot open checkpoint '" + path.string() + "'");
  }

  void write(const AnnotationRecord& record) {
    const std::string line = nlohmann::json(record).dump() + "\n";
    std::lock_guard<std::mutex> lock(mu_);
    out_ << line;
    out_.flush();
    if (!out_) throw IoError("checkpoint write failed");
  }

 private:
  std::mutex mu_;
  std::ofstream out_;
};

nlohmann::json read_json_file(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open '" + path.string() + "'");
  try {
    return nlohmann::json::parse(in);
  } catch (const nlohmann::json::parse_error& e) {
    throw ResumeError("'" + path.string() + "' is not valid JSON: " + e.what());
  }
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
  if (!out) throw IoError("write failed for '" + path.string() + "'");
}

}  // namespace

CheckpointLoad load_checkpoint_records(const fs::path& records_file) {
  CheckpointLoad out;
  std::ifstream in(records_file);
  if (!in) return out;
  std::unordered_map<std::string, std::size_t> index;
  std::string line;
  while (std::getline(in, line)) {
    if (line.find_first_not_of(" \t\r") == std::string::npos) continue;
    AnnotationRecord r;
    try {
      r = nlohmann::json::parse(line).get<AnnotationRecord>();
    } catch (const std::exception&) {
      ++out.skipped_lines;
      continue;
    }
    auto it = index.find(r.sample_id);
    if (it == index.end()) {
      index.emplace(r.sample_id, out.records.size());
      out.records.push_back(std::move(r));
    } else {
      out.records[it->second] = std::move(r);
    }
  }
  return out;
}

RunResult run(const PipelineConfig& config, const std::vector<CleanSample>& samples,
              Services services, const RunOptions& options) {
  {
    std::unordered_set<std::string> seen;
    for (const auto& s : samples) {
      if (!seen.insert(s.id).second) throw ArgumentError("duplicate sample id '" + s.id + "'");
    }
  }
  const std::string config_hash = config.hash();
  const std::string digest = samples_digest(samples);

  RunResult result;
  result.records.reserve(samples.size());
  std::unique_ptr<CheckpointLog> log;

  if (options.checkpoint_dir) {
    const fs::path dir = *options.checkpoint_dir;
    fs::create_directories(dir);
    const fs::path run_file = dir / kRunFile;
    std::unordered_map<std::string, AnnotationRecord> prior;
    bool append = false;
    if (options.resume && fs::exists(run_file)) {
      const auto meta = read_json_file(run_file);
      const bool same_config = meta.value("config_hash", "") == config_hash;
      const bool same_samples = meta.value("samples_digest", "") == digest;
      if (!same_config && !options.force) {
        throw ResumeError("checkpoint in '" + dir.string() +
                          "' was written under a different configuration (hash " +
                          meta.value("config_hash", "?").substr(0, 12) + " vs " +
                          config_hash.substr(0, 12) + "); rerun without resume or force it");
      }
      if (!same_samples && !options.force) {
        throw ResumeError("checkpoint in '" + dir.string() + "' was written for a different sample set");
      }
      if (same_config && same_samples) {
        for (auto& r : load_checkpoint_records(dir / kRecordsFile).records) {
          prior.emplace(r.sample_id, std::move(r));
        }
        append = true;
      }
    }
    write_text(run_file, nlohmann::json{{"config_hash", config_hash},
                                        {"samples_digest", digest},
                                        {"sample_count", samples.size()}}
                                 .dump(2) +
                             "\n");
    write_samples(dir / kSamplesFile, samples);
    log = std::make_unique<CheckpointLog>(dir / kRecordsFile, append);
    for (const auto& s : samples) {
      auto it = prior.find(s.id);
      result.records.push_back(it != prior.end() ? std::move(it->second)
                                                 : AnnotationRecord::pending(s));
    }
  } else {
    for (const auto& s : samples) result.records.push_back(AnnotationRecord::pending(s));
  }

  std::vector<std::size_t> todo;
  for (std::size_t i = 0; i < result.records.size(); ++i) {
    if (is_terminal(result.records[i].status)) {
      ++result.resumed_terminal;
    } else {
      todo.push_back(i);
      // Fresh records get their first line so the log lists every sample.
      if (log && result.records[i].revision == 0) log->write(result.records[i]);
    }
  }

  AnnotatorOptions annotator_options;
  annotator_options.params = config.params;
  annotator_options.refusal_patterns = config.refusal_patterns;
  const Annotator annotator(services.client, config.prompts, annotator_options);
  const StepContext ctx{config, annotator, services.scorer};

  std::atomic<std::size_t> next{0};
  std::atomic<std::size_t> finished{0};
  std::atomic<bool> stop{false};
  std::mutex error_mu;
  std::exception_ptr first_error;

  auto worker = [&] {
    while (!stop.load()) {
      const std::size_t k = next.fetch_add(1);
      if (k >= todo.size()) return;
      AnnotationRecord& slot = result.records[todo[k]];
      try {
        while (!is_terminal(slot.status)) {
          if (stop.load()) return;
          AnnotationRecord advanced = step(slot, ctx);
          if (log) log->write(advanced);
          slot = std::move(advanced);
        }
      } catch (...) {
        auto e = std::current_exception();
        std::lock_guard<std::mutex> lock(error_mu);
        // Per-sample outcomes are handled inside step(); anything reaching
        // here is a backend, scorer or I/O failure and ends the run.
        if (!first_error) first_error = e;
        stop.store(true);
        return;
      }
      const std::size_t done = finished.fetch_add(1) + 1;
      if (options.halt_after && done >= *options.halt_after) stop.store(true);
    }
  };

  const std::size_t n_workers = std::min<std::size_t>(std::max<std::size_t>(config.concurrency, 1),
                                                      std::max<std::size_t>(todo.size(), 1));
  if (!todo.empty()) {
    std::vector<std::thread> pool;
    pool.reserve(n_workers);
    for (std::size_t i = 0; i < n_workers; ++i) pool.emplace_back(worker);
    for (auto& t : pool) t.join();
  }
  if (first_error) std::rethrow_exception(first_error);

  result.halted = std::any_of(result.records.begin(), result.records.end(),
                              [](const AnnotationRecord& r) { return !is_terminal(r.status); });
  const std::string version = pipeline_version(config);
  for (const auto& r : result.records) {
    if (r.status != Status::Accepted) continue;
    result.pairs.push_back(
        ParallelPair{r.sample_id, r.toxic_text, r.paraphrase.value(), r.source, r.scores, version});
  }
  result.stats = fold_stats(result.records, config);
  return result;
}

RunResult resume(const fs::path& checkpoint_dir, const PipelineConfig& config, Services services) {
  const fs::path samples_file = checkpoint_dir / kSamplesFile;
  if (!fs::exists(samples_file)) {
    throw ResumeError("no checkpointed samples in '" + checkpoint_dir.string() + "'");
  }
  RunOptions options;
  options.checkpoint_dir = checkpoint_dir;
  options.resume = true;
  return run(config, read_samples(samples_file), services, options);
}

CorpusFiles write_corpus(const fs::path& out_dir, const std::vector<ParallelPair>& pairs,
                         const SplitResult& parts, const SplitSpec& spec) {
  fs::create_directories(out_dir);
  CorpusFiles files{out_dir / "corpus.jsonl", out_dir / "pairs.tsv", out_dir / "train.tsv",
                    out_dir / "val.tsv",      out_dir / "test.tsv",  out_dir / "splits.json"};

  std::unordered_map<std::string, std::string> tag;
  for (const auto& p : parts.train) tag[p.id] = "train";
  for (const auto& p : parts.val) tag[p.id] = "val";
  for (const auto& p : parts.test) tag[p.id] = "test";

  auto number_or_null = [](const std::optional<double>& v) {
    return v ? nlohmann::ordered_json(*v) : nlohmann::ordered_json(nullptr);
  };

  std::string corpus;
  std::string tsv;
  for (const auto& p : pairs) {
    auto it = tag.find(p.id);
    nlohmann::ordered_json line{{"id", p.id},
                                {"toxic", p.toxic},
                                {"detoxified", p.detoxified},
                                {"source", p.source},
                                {"content_sim", number_or_null(p.validation_scores.content_sim)},
                                {"toxicity", number_or_null(p.validation_scores.toxicity)},
                                {"split", it == tag.end() ? "none" : it->second},
                                {"pipeline_version", p.pipeline_version}};
    corpus += line.dump() + "\n";
    tsv += tsv_cell(p.toxic) + "\t" + tsv_cell(p.detoxified) + "\n";
  }
  write_text(files.corpus, corpus);
  write_text(files.pairs, tsv);

  auto part_tsv = [](const std::vector<ParallelPair>& part) {
    std::string out;
    for (const auto& p : part) out += tsv_cell(p.toxic) + "\t" + tsv_cell(p.detoxified) + "\n";
    return out;
  };
  write_text(files.train, part_tsv(parts.train));
  write_text(files.val, part_tsv(parts.val));
  write_text(files.test, part_tsv(parts.test));

  auto ids = [](const std::vector<ParallelPair>& part) {
    std::vector<std::string> out;
    for (const auto& p : part) out.push_back(p.id);
    return out;
  };
  nlohmann::ordered_json manifest{
      {"seed", spec.seed},
      {"ratios", {spec.train, spec.val, spec.test}},
      {"counts", {{"train", parts.train.size()}, {"val", parts.val.size()}, {"test", parts.test.size()}}},
      {"files", {{"train", "train.tsv"}, {"val", "val.tsv"}, {"test", "test.tsv"}}},
      {"ids", {{"train", ids(parts.train)}, {"val", ids(parts.val)}, {"test", ids(parts.test)}}},
  };
  write_text(files.splits, manifest.dump(2) + "\n");
  return files;
}

}  // namespace detox
