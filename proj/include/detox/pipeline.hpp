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
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include <nlohmann/json.hpp>

#include "detox/annotator.hpp"
#include "detox/config.hpp"
#include "detox/ingest.hpp"
#include "detox/llm_client.hpp"
#include "detox/scorer.hpp"
#include "detox/scoring.hpp"

namespace detox {

// Per-sample state. Paraphrased and ContentPassed are the intermediate
// states between the paraphrase and the two verdicts.
enum class Status {
  Pending,
  RefusedOnce,
  Paraphrased,
  ContentPassed,
  RefusedFinal,
  ContentFail,
  ToxicFail,
  VerdictError,
  Accepted,
};

std::string_view to_string(Status status);
Status status_from_string(std::string_view name);
bool is_terminal(Status status);
const std::vector<Status>& terminal_statuses();

struct ValidationScores {
  std::optional<double> content_sim;  // validation-profile cosine(toxic, paraphrase)
  std::optional<double> toxicity;     // toxicity score of the paraphrase

  bool operator==(const ValidationScores&) const = default;
};

struct AnnotationRecord {
  std::string sample_id;
  std::string source;
  std::string toxic_text;
  std::optional<std::string> paraphrase;
  std::vector<Attempt> attempts;  // append-only, in call order
  std::optional<Verdict> task2_verdict;
  std::optional<Verdict> task3_verdict;
  ValidationScores scores;
  Status status = Status::Pending;
  std::optional<std::string> error;
  int revision = 0;
  std::string created_at;
  std::string updated_at;

  static AnnotationRecord pending(const CleanSample& sample);
};

void to_json(nlohmann::json& j, const AnnotationRecord& r);
void from_json(const nlohmann::json& j, AnnotationRecord& r);

struct ParallelPair {
  std::string id;
  std::string toxic;
  std::string detoxified;
  std::string source;
  ValidationScores validation_scores;
  std::string pipeline_version;

  bool operator==(const ParallelPair&) const = default;
};

void to_json(nlohmann::json& j, const ParallelPair& p);

struct RunStats {
  std::size_t input = 0;
  std::map<Status, std::size_t> status_counts;  // terminal statuses only, zeros included
  std::size_t in_progress = 0;                  // non-terminal records (interrupted runs)
  std::size_t paraphrased = 0;
  std::size_t task2_passed = 0;
  std::size_t task3_evaluated = 0;
  std::size_t accepted = 0;
  std::size_t refusal_first_pass = 0;
  std::size_t refusal_recovered = 0;
  UsageLedger usage;  // every attempt, cache hits included
  CostEstimate cost;
  std::optional<AgreementReport> content_agreement;
  std::optional<AgreementReport> toxicity_agreement;

  std::size_t count(Status s) const {
    auto it = status_counts.find(s);
    return it == status_counts.end() ? 0 : it->second;
  }
};

void to_json(nlohmann::json& j, const RunStats& s);
void from_json(const nlohmann::json& j, RunStats& s);

// Everything step() needs besides the record. scorer may be null when no
// scorer is configured; scores are then left empty.
struct StepContext {
  const PipelineConfig& config;
  const Annotator& annotator;
  Scorer* scorer = nullptr;
};

// Advances exactly one transition. Throws ArgumentError on a terminal record.
AnnotationRecord step(const AnnotationRecord& record, const StepContext& ctx);

// Drives a record to a terminal status.
AnnotationRecord annotate(AnnotationRecord record, const StepContext& ctx);

// LlmVerdict: task2 = Yes and task3 = No. Conjunctive additionally needs
// content_sim > content_sim_min and toxicity <= toxicity_max_for_nontoxic.
// Throws GateError when verdicts (or, under Conjunctive, scores) are missing.
bool apply_gate(const AnnotationRecord& record, GatingPolicy policy,
                const ScoreThresholds& thresholds);

struct SplitResult {
  std::vector<ParallelPair> train;
  std::vector<ParallelPair> val;
  std::vector<ParallelPair> test;
};

struct SplitSizes {
  std::size_t train = 0;
  std::size_t val = 0;
  std::size_t test = 0;
};

// floor(n * r_val) and floor(n * r_test); train takes the remainder.
SplitSizes split_sizes(std::size_t n, const SplitSpec& spec);

// Seeded Fisher-Yates shuffle, then cut into val, test, train sizes.
// Throws ArgumentError for fewer than 3 pairs.
SplitResult split(const std::vector<ParallelPair>& pairs, const SplitSpec& spec);

struct AgreementReports {
  std::optional<AgreementReport> content;
  std::optional<AgreementReport> toxicity;
};

// Content: Task-2 verdict vs similarity label, over records carrying both.
// Toxicity: Task-3 "Yes" vs toxicity label, likewise. A kind with fewer
// than 2 usable records is left empty; fewer than 2 records overall throws
// ArgumentError.
AgreementReports compute_agreement(const std::vector<AnnotationRecord>& records,
                                   const ScoreThresholds& thresholds);

// Pure fold over terminal records.
RunStats fold_stats(const std::vector<AnnotationRecord>& records, const PipelineConfig& config);

struct RunOptions {
  std::optional<std::filesystem::path> checkpoint_dir;
  bool resume = false;
  bool force = false;  // on a hash mismatch, discard the checkpoint and start over
  std::optional<std::size_t> halt_after;  // stop once this many records are terminal
};

struct RunResult {
  std::vector<ParallelPair> pairs;  // input order
  RunStats stats;
  std::vector<AnnotationRecord> records;  // input order
  bool halted = false;
  std::size_t resumed_terminal = 0;  // records found terminal in the checkpoint
};

struct Services {
  ChatClient& client;
  Scorer* scorer = nullptr;
};

// Checkpoint directory layout:
//   run.json       {config_hash, samples_digest, sample_count}
//   samples.jsonl  the input samples
//   records.jsonl  one AnnotationRecord revision per line, last one wins
//
// Throws ResumeError when resuming under a different config hash or sample
// set (unless force is set). Unrecoverable backend errors abort the run
// after in-flight records are checkpointed.
RunResult run(const PipelineConfig& config, const std::vector<CleanSample>& samples,
              Services services, const RunOptions& options = {});

// Resumes from the samples stored in the checkpoint directory. An empty or
// missing directory with no stored samples is an error; use run() for a
// fresh start.
RunResult resume(const std::filesystem::path& checkpoint_dir, const PipelineConfig& config,
                 Services services);

struct CheckpointLoad {
  std::vector<AnnotationRecord> records;  // last revision per sample, first-seen order
  std::size_t skipped_lines = 0;
};

// Corrupt lines are skipped and counted.
CheckpointLoad load_checkpoint_records(const std::filesystem::path& records_file);

std::string samples_digest(const std::vector<CleanSample>& samples);
std::string pipeline_version(const PipelineConfig& config);

// Replaces tabs and line breaks with spaces so a text fits one TSV cell.
std::string tsv_cell(std::string_view text);

struct CorpusFiles {
  std::filesystem::path corpus;  // corpus.jsonl
  std::filesystem::path pairs;   // pairs.tsv (toxic TAB detoxified)
  std::filesystem::path train;
  std::filesystem::path val;
  std::filesystem::path test;
  std::filesystem::path splits;  // splits.json
};

// Writes the corpus (input order, split tag per line), the two-column
// export, one TSV per split and the split manifest.
CorpusFiles write_corpus(const std::filesystem::path& out_dir,
                         const std::vector<ParallelPair>& pairs, const SplitResult& parts,
                         const SplitSpec& spec);

}  // namespace detox
