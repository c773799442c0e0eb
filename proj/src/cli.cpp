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

#include "detox/cli.hpp"

#include <CLI11.hpp>

#include <cstdlib>
#include <fstream>
#include <iomanip>
#include <map>
#include <memory>
#include <optional>
#include <ostream>
#include <sstream>

#include "detox/config.hpp"
#include "detox/error.hpp"
#include "detox/evalharness.hpp"
#include "detox/ingest.hpp"
#include "detox/llm_client.hpp"
#include "detox/mock_backend.hpp"
#include "detox/pipeline.hpp"
#include "detox/scorer.hpp"
#include "detox/time_util.hpp"

namespace detox {

namespace fs = std::filesystem;
using ojson = nlohmann::ordered_json;

namespace {

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::string out;
};

std::optional<std::string> env(const char* name) {
  const char* v = std::getenv(name);
  if (v == nullptr || *v == '\0') return std::nullopt;
  return std::string(v);
}

PipelineConfig load_config(const CommonFlags& flags) {
  PipelineConfig config = flags.config.empty() ? PipelineConfig{} : PipelineConfig::load(flags.config);
  if (flags.seed) {
    config.seed = *flags.seed;
    config.split.seed = *flags.seed;
  }
  if (auto base = env("DETOX_API_BASE")) config.backend.base_url = *base;
  if (auto base = env("DETOX_SCORER_BASE")) config.scorer.base_url = *base;
  return config;
}

void write_text(const fs::path& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw IoError("cannot write '" + path.string() + "'");
  out << text;
}

void write_json(const fs::path& path, const ojson& j) { write_text(path, j.dump(2) + "\n"); }

ojson prompt_versions(const PipelineConfig& config) {
  return ojson{{"paraphrase", config.prompts.paraphrase.version()},
               {"paraphrase_fallback", config.prompts.fallback.version()},
               {"content_check", config.prompts.content_check.version()},
               {"toxicity_check", config.prompts.toxicity_check.version()}};
}

std::shared_ptr<Scorer> make_scorer(const PipelineConfig& config) {
  if (config.scorer.kind == "mock") {
    if (config.scorer.mock_table.empty()) return std::make_shared<MockScorer>();
    return MockScorer::from_file(config.scorer.mock_table);
  }
  if (config.scorer.kind == "http") {
    return std::make_shared<HttpScorer>(config.scorer.base_url, config.scorer.batch_size);
  }
  return nullptr;
}

std::shared_ptr<ChatBackend> make_backend(const PipelineConfig& config) {
  if (config.backend.kind == "mock") {
    if (config.backend.mock_script.empty()) throw ConfigError("mock backend needs a script");
    if (!fs::exists(config.backend.mock_script)) {
      throw ConfigError("mock script '" + config.backend.mock_script.string() + "' not found");
    }
    return MockBackend::from_file(config.backend.mock_script);
  }
  auto key = env("DETOX_API_KEY");
  if (!key) throw ConfigError("DETOX_API_KEY is not set");
  return std::make_shared<OpenAiBackend>(config.backend.base_url, *key,
                                         std::chrono::seconds(config.backend.timeout_seconds));
}

// ---------------------------------------------------------------- ingest

int cmd_ingest(const CommonFlags& flags, std::ostream& out, std::ostream& err) {
  const PipelineConfig config = load_config(flags);
  if (config.sources.empty()) throw ConfigError("config lists no sources");
  const fs::path out_dir = flags.out;
  fs::create_directories(out_dir);

  ojson per_source = ojson::array();
  std::vector<RawPost> kept;
  for (const auto& spec : config.sources) {
    const LoadResult loaded = load_source(spec);
    const auto filtered = filter_hate(loaded.posts, config.label_policy);
    const auto policy = config.label_policy.find(spec.source);
    if (policy != config.label_policy.end() && policy->second.empty()) {
      err << "warning: source '" << spec.source << "' allows no labels; it contributes no samples\n";
    }
    per_source.push_back(ojson{{"source", spec.source},
                               {"rows", loaded.posts.size() + loaded.skipped_empty},
                               {"skipped_empty", loaded.skipped_empty},
                               {"kept_by_label", filtered.size()}});
    kept.insert(kept.end(), filtered.begin(), filtered.end());
  }
  const NormalizedBatch normalized = normalize_posts(kept);
  const DedupeResult deduped = dedupe(normalized.samples);
  if (deduped.samples.empty()) err << "warning: ingest produced zero samples\n";
  write_samples(out_dir / "samples.jsonl", deduped.samples);

  const ojson summary{{"sources", per_source},
                      {"after_label_filter", kept.size()},
                      {"degenerate", normalized.degenerate_ids.size()},
                      {"degenerate_ids", normalized.degenerate_ids},
                      {"duplicates", deduped.duplicates},
                      {"samples", deduped.samples.size()}};
  write_json(out_dir / "ingest_summary.json", summary);
  write_json(out_dir / "manifest.json",
             ojson{{"command", "ingest"},
                   {"config_hash", config.hash()},
                   {"outputs", {{"samples", "samples.jsonl"}, {"summary", "ingest_summary.json"}}},
                   {"summary", summary}});

  for (const auto& s : per_source) {
    out << s["source"].get<std::string>() << ": " << s["kept_by_label"] << " of " << s["rows"]
        << " rows kept\n";
  }
  out << "samples: " << deduped.samples.size() << " (" << normalized.degenerate_ids.size()
      << " degenerate, " << deduped.duplicates << " duplicates)\n";
  return kExitOk;
}

// ---------------------------------------------------------------- build

struct BuildFlags {
  std::string samples;
  std::string mock_script;
  std::string policy;
  bool resume = false;
  bool force = false;
  std::optional<std::size_t> halt_after;
  std::optional<std::size_t> concurrency;
};

void print_stats(const RunStats& s, std::ostream& out);

int cmd_build(const CommonFlags& flags, const BuildFlags& build, std::ostream& out,
              std::ostream& err) {
  PipelineConfig config = load_config(flags);
  if (!build.mock_script.empty()) {
    config.backend.kind = "mock";
    config.backend.mock_script = build.mock_script;
  }
  if (!build.policy.empty()) config.gating = gating_policy_from_string(build.policy);
  if (build.concurrency) config.concurrency = *build.concurrency;
  config.validate();

  const fs::path out_dir = flags.out;
  const fs::path checkpoint_dir = out_dir / "checkpoint";
  fs::create_directories(out_dir);

  std::vector<CleanSample> samples;
  if (!build.samples.empty()) {
    if (!fs::exists(build.samples)) throw IoError("samples file '" + build.samples + "' not found");
    samples = read_samples(build.samples);
  } else if (build.resume && fs::exists(checkpoint_dir / "samples.jsonl")) {
    samples = read_samples(checkpoint_dir / "samples.jsonl");
  } else {
    throw ConfigError("build needs --samples (or --resume on an existing output directory)");
  }

  auto backend = make_backend(config);
  auto scorer = make_scorer(config);

  ClientOptions client_options;
  client_options.retry.max_attempts = config.backend.max_attempts;
  client_options.retry.base_delay = std::chrono::milliseconds(config.backend.base_delay_ms);
  client_options.retry.jitter = config.backend.jitter;
  client_options.rate_limit_per_second = config.backend.rate_limit_per_second;
  client_options.cache_enabled = config.backend.cache;
  if (config.backend.cache) {
    client_options.cache_path =
        config.backend.cache_path.empty() ? out_dir / "cache.jsonl" : config.backend.cache_path;
  }
  client_options.seed = config.seed;
  ChatClient client(backend, client_options);

  RunOptions options;
  options.checkpoint_dir = checkpoint_dir;
  options.resume = build.resume;
  options.force = build.force;
  options.halt_after = build.halt_after;

  const std::string started = utc_now_iso();
  const RunResult result = run(config, samples, Services{client, scorer.get()}, options);
  const ojson session{{"started_at", started},
                      {"finished_at", utc_now_iso()},
                      {"resumed_terminal", result.resumed_terminal},
                      {"live_calls", client.live_dispatches()},
                      {"cache_hits", client.cache_hits()},
                      {"halted", result.halted}};
  write_json(out_dir / "session.json", session);

  if (result.halted) {
    err << "interrupted with " << result.stats.in_progress
        << " samples unfinished; checkpoint kept, rerun with --resume\n";
    return kExitInterrupted;
  }

  SplitResult parts;
  if (result.pairs.size() >= 3) {
    parts = split(result.pairs, config.split);
  } else if (!result.pairs.empty()) {
    err << "warning: only " << result.pairs.size() << " accepted pairs; no split assigned\n";
  }
  write_corpus(out_dir, result.pairs, parts, config.split);

  const ojson stats_json = nlohmann::json(result.stats);
  write_json(out_dir / "stats.json", stats_json);
  write_json(out_dir / "manifest.json",
             ojson{{"command", "build"},
                   {"config_hash", config.hash()},
                   {"pipeline_version", pipeline_version(config)},
                   {"prompt_versions", prompt_versions(config)},
                   {"gating", std::string(to_string(config.gating))},
                   {"seed", config.seed},
                   {"samples", samples.size()},
                   {"pairs", result.pairs.size()},
                   {"split",
                    {{"train", parts.train.size()}, {"val", parts.val.size()}, {"test", parts.test.size()}}},
                   {"stats", stats_json},
                   {"outputs",
                    {{"corpus", "corpus.jsonl"},
                     {"pairs", "pairs.tsv"},
                     {"train", "train.tsv"},
                     {"val", "val.tsv"},
                     {"test", "test.tsv"},
                     {"splits", "splits.json"},
                     {"stats", "stats.json"},
                     {"checkpoint", "checkpoint/records.jsonl"}}}});
  print_stats(result.stats, out);
  out << "pairs: " << result.pairs.size() << " (train " << parts.train.size() << ", val "
      << parts.val.size() << ", test " << parts.test.size() << ")\n";
  return kExitOk;
}

// ---------------------------------------------------------------- eval

struct EvalFlags {
  std::string outputs;
  std::string references;
  std::string baseline;
  std::string lexicon;
};

int cmd_eval(const CommonFlags& flags, const EvalFlags& ev, std::ostream& out, std::ostream&) {
  const PipelineConfig config = load_config(flags);
  if (!fs::exists(ev.outputs)) throw IoError("outputs file '" + ev.outputs + "' not found");
  if (!fs::exists(ev.references)) throw IoError("reference file '" + ev.references + "' not found");
  auto scorer = make_scorer(config);
  if (!scorer) throw ConfigError("eval needs a scorer (scorer.kind mock or http)");

  const fs::path out_dir = flags.out;
  fs::create_directories(out_dir);

  auto items = read_eval_items(ev.outputs, !ev.baseline.empty());
  const auto references = read_references(ev.references);
  check_alignment(items.size(), references.size());

  if (ev.baseline == "duplicate") {
    for (auto& it : items) it.output = baseline_duplicate(it.toxic);
  } else if (ev.baseline == "delete") {
    const fs::path lex_path = ev.lexicon.empty() ? config.eval.lexicon : fs::path(ev.lexicon);
    if (lex_path.empty()) throw ConfigError("delete baseline needs a lexicon (--lexicon or eval.lexicon)");
    const Lexicon lexicon = load_lexicon(lex_path);
    for (auto& it : items) it.output = baseline_delete(it.toxic, lexicon);
  } else if (!ev.baseline.empty()) {
    throw ConfigError("unknown baseline '" + ev.baseline + "' (duplicate or delete)");
  }
  if (!ev.baseline.empty()) {
    std::string tsv;
    for (const auto& it : items) tsv += tsv_cell(it.toxic) + "\t" + tsv_cell(it.output) + "\n";
    write_text(out_dir / "outputs.tsv", tsv);
  }

  EvalOptions options;
  options.style_threshold = config.eval.style_threshold;
  options.fluency_threshold = config.eval.fluency_threshold;
  options.evaluation_dimension = config.scorer.evaluation_dimension;
  const EvalReport report = evaluate(items, references, *scorer, options);
  write_eval_report(out_dir, report);

  ojson outputs{{"report", "eval_report.json"}, {"per_sample", "eval_per_sample.jsonl"}};
  if (!ev.baseline.empty()) outputs["outputs"] = "outputs.tsv";
  write_json(out_dir / "manifest.json",
             ojson{{"command", "eval"},
                   {"config_hash", config.hash()},
                   {"baseline", ev.baseline.empty() ? ojson(nullptr) : ojson(ev.baseline)},
                   {"report", nlohmann::json(report)},
                   {"outputs", outputs}});

  out << std::fixed << std::setprecision(4) << "style_accuracy        " << report.style_accuracy
      << "\ncontent_preservation  " << report.content_preservation << "\nfluency               "
      << report.fluency << "\nbleu                  " << report.bleu << "\nn                     "
      << report.n << "\n";
  return kExitOk;
}

// ---------------------------------------------------------------- stats

void print_agreement(const char* label, const std::optional<AgreementReport>& r, std::ostream& out) {
  out << "kappa " << label << ": ";
  if (r) {
    out << std::fixed << std::setprecision(3) << r->kappa << " (n=" << r->n << ")\n";
  } else {
    out << "n/a\n";
  }
}

void print_stats(const RunStats& s, std::ostream& out) {
  out << std::left;
  out << std::setw(22) << "status" << "count\n";
  for (auto st : terminal_statuses()) {
    out << std::setw(22) << std::string(to_string(st)) << s.count(st) << "\n";
  }
  if (s.in_progress > 0) out << std::setw(22) << "in progress" << s.in_progress << "\n";
  out << std::setw(22) << "total" << s.input << "\n";
  out << std::setw(22) << "refusal_first_pass" << s.refusal_first_pass << "\n";
  out << std::setw(22) << "refusal_recovered" << s.refusal_recovered << "\n";
  print_agreement("content", s.content_agreement, out);
  print_agreement("toxicity", s.toxicity_agreement, out);
  out << "tokens: " << s.usage.total_input_tokens() << " in, " << s.usage.total_output_tokens()
      << " out\n";
  out << "cost: " << s.cost.display() << "\n";
  out << std::right;
}

int cmd_stats(const CommonFlags& flags, const std::string& from, std::ostream& out,
              std::ostream& err) {
  const PipelineConfig config = load_config(flags);
  const fs::path input = from;
  if (!fs::exists(input)) throw IoError("'" + from + "' not found");

  RunStats stats;
  std::size_t skipped = 0;
  std::string origin;
  auto from_records = [&](const fs::path& file) {
    const auto loaded = load_checkpoint_records(file);
    stats = fold_stats(loaded.records, config);
    skipped = loaded.skipped_lines;
    origin = "checkpoint";
  };
  auto from_manifest = [&](const fs::path& file) {
    std::ifstream in(file);
    nlohmann::json j;
    try {
      j = nlohmann::json::parse(in);
    } catch (const nlohmann::json::parse_error& e) {
      throw ConfigError("'" + file.string() + "' is not valid JSON: " + e.what());
    }
    if (!j.contains("stats")) throw ConfigError("'" + file.string() + "' has no stats section");
    stats = j["stats"].get<RunStats>();
    origin = "manifest";
  };

  if (fs::is_directory(input)) {
    if (fs::exists(input / "records.jsonl")) {
      from_records(input / "records.jsonl");
    } else if (fs::exists(input / "checkpoint" / "records.jsonl")) {
      from_records(input / "checkpoint" / "records.jsonl");
    } else if (fs::exists(input / "manifest.json")) {
      from_manifest(input / "manifest.json");
    } else {
      stats = fold_stats({}, config);
      origin = "empty";
    }
  } else if (input.extension() == ".jsonl") {
    from_records(input);
  } else {
    from_manifest(input);
  }

  print_stats(stats, out);
  if (skipped > 0) {
    out << skipped << " skipped\n";
    err << "warning: " << skipped << " corrupt checkpoint line(s) skipped\n";
  }

  const fs::path out_dir = flags.out.empty()
                               ? (fs::is_directory(input) ? input : input.parent_path())
                               : fs::path(flags.out);
  fs::create_directories(out_dir.empty() ? fs::path(".") : out_dir);
  write_json((out_dir.empty() ? fs::path(".") : out_dir) / "stats_manifest.json",
             ojson{{"command", "stats"},
                   {"origin", origin},
                   {"skipped_lines", skipped},
                   {"stats", nlohmann::json(stats)}});
  return kExitOk;
}

int exit_code_for(const std::exception_ptr& e, std::ostream& err) {
  try {
    std::rethrow_exception(e);
  } catch (const ConfigError& ex) {
    err << "config error: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const IoError& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const ResumeError& ex) {
    err << "resume error: " << ex.what() << "\n";
    return kExitConfig;
  } catch (const TransportError& ex) {
    err << "transport error: " << ex.what() << "\n";
    return kExitTransport;
  } catch (const ServiceError& ex) {
    err << "scorer error: " << ex.what() << "\n";
    return kExitTransport;
  } catch (const std::exception& ex) {
    err << "error: " << ex.what() << "\n";
    return kExitFailure;
  }
}

}  // namespace

int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err) {
  CLI::App app{"Parallel detoxification corpus builder", "detox"};
  app.require_subcommand(1);

  CommonFlags common;
  auto add_common = [&](CLI::App* cmd, bool out_required) {
    cmd->add_option("--config", common.config, "Pipeline config (JSON)");
    cmd->add_option("--seed", common.seed, "Override the config seed");
    auto* o = cmd->add_option("--out", common.out, "Output directory");
    if (out_required) o->required();
  };

  auto* ingest = app.add_subcommand("ingest", "Load, filter, normalize and dedupe the sources");
  add_common(ingest, true);

  BuildFlags build;
  auto* build_cmd = app.add_subcommand("build", "Run the annotation pipeline and emit the corpus");
  add_common(build_cmd, true);
  build_cmd->add_option("--samples", build.samples, "samples.jsonl from ingest");
  build_cmd->add_option("--mock-script", build.mock_script, "Use the scripted offline backend");
  build_cmd->add_option("--policy", build.policy, "Gating policy: llm_verdict | conjunctive");
  build_cmd->add_flag("--resume", build.resume, "Continue from the checkpoint in --out");
  build_cmd->add_flag("--force", build.force, "With --resume, discard a mismatched checkpoint");
  build_cmd->add_option("--concurrency", build.concurrency, "In-flight samples");
  build_cmd->add_option("--halt-after", build.halt_after)->group("");

  EvalFlags ev;
  auto* eval = app.add_subcommand("eval", "Score system outputs against references");
  add_common(eval, true);
  eval->add_option("--outputs", ev.outputs, "toxic TAB output file")->required();
  eval->add_option("--references", ev.references, "Reference file, one per line")->required();
  eval->add_option("--baseline", ev.baseline, "Generate outputs first: duplicate | delete");
  eval->add_option("--lexicon", ev.lexicon, "Word list for the delete baseline");

  std::string from;
  auto* stats = app.add_subcommand("stats", "Funnel report from a build directory or manifest");
  add_common(stats, false);
  stats->add_option("input", from, "Build dir, checkpoint dir, records.jsonl or manifest")->required();

  std::vector<std::string> reversed(args.rbegin(), args.rend());
  try {
    app.parse(reversed);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*ingest) return cmd_ingest(common, out, err);
    if (*build_cmd) return cmd_build(common, build, out, err);
    if (*eval) return cmd_eval(common, ev, out, err);
    return cmd_stats(common, from, out, err);
  } catch (...) {
    return exit_code_for(std::current_exception(), err);
  }
}

}  // namespace detox
