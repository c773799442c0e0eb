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

// Acceptance checks. One PASS/FAIL line per criterion; exit status 1 if
// any criterion fails.

#include <chrono>
#include <cstdio>
#include <fstream>
#include <functional>
#include <iostream>
#include <memory>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include <nlohmann/json.hpp>

#include "../support/normalizer_corpus.hpp"
#include "../support/oracles.hpp"
#include "../support/temp_dir.hpp"
#include "detox/cli.hpp"
#include "detox/error.hpp"
#include "detox/evalharness.hpp"
#include "detox/ingest.hpp"
#include "detox/llm_client.hpp"
#include "detox/mock_backend.hpp"
#include "detox/pipeline.hpp"
#include "detox/scorer.hpp"
#include "detox/scoring.hpp"

namespace fs = std::filesystem;
using namespace detox;
using test::fixture;

namespace {

struct Outcome {
  bool pass = true;
  std::string detail;

  void require(bool ok, const std::string& what) {
    if (!ok && pass) {
      pass = false;
      detail = what;
    }
  }
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string fmt(const char* f, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, f, v);
  return buf;
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream s;
  s << in.rdbuf();
  return s.str();
}

nlohmann::json read_json(const fs::path& p) { return nlohmann::json::parse(std::ifstream(p)); }

int cli(const std::vector<std::string>& args) {
  std::ostringstream out, err;
  return run_cli(args, out, err);
}

std::vector<std::string> build_args(const fs::path& out) {
  return {"build", "--config", fixture("pipeline/config.json").string(), "--samples",
          fixture("pipeline/samples.jsonl").string(), "--out", out.string()};
}

// ------------------------------------------------------------------ checks

Outcome scripted_end_to_end() {
  Outcome o;
  const auto t0 = Clock::now();
  test::TempDir a, b;
  o.require(cli(build_args(a.path())) == 0, "first build failed");
  o.require(cli(build_args(b.path())) == 0, "second build failed");
  if (!o.pass) return o;

  const auto stats = read_json(a.path() / "stats.json");
  const nlohmann::json expected{{"Accepted", 3},    {"ContentFail", 1}, {"RefusedFinal", 1},
                                {"ToxicFail", 1},   {"VerdictError", 0}};
  o.require(stats["status_counts"] == expected, "status counts " + stats["status_counts"].dump());
  const auto& f = stats["funnel"];
  const std::vector<int> funnel{f["input"], f["paraphrased"], f["task2_passed"], f["task3_evaluated"],
                                f["accepted"]};
  for (std::size_t i = 1; i < funnel.size(); ++i) {
    o.require(funnel[i] <= funnel[i - 1], "funnel not monotone: " + f.dump());
  }
  o.require(slurp(a.path() / "corpus.jsonl") == slurp(b.path() / "corpus.jsonl"),
            "corpus.jsonl differs between invocations");
  o.require(slurp(a.path() / "manifest.json") == slurp(b.path() / "manifest.json"),
            "manifest.json differs between invocations");
  const double secs = seconds_since(t0);
  o.require(secs < 5.0, "took " + fmt("%.2f s", secs));
  if (o.pass) {
    o.detail = "Accepted 3, ContentFail 1, RefusedFinal 1, ToxicFail 1, VerdictError 0; funnel " +
               f.dump() + "; " + fmt("%.2f s", secs);
  }
  return o;
}

Outcome resume_equivalence() {
  Outcome o;
  const auto t0 = Clock::now();
  test::TempDir whole, split_run;
  o.require(cli(build_args(whole.path())) == 0, "uninterrupted build failed");
  auto halted = build_args(split_run.path());
  halted.insert(halted.end(), {"--halt-after", "3", "--concurrency", "1"});
  o.require(cli(halted) == 4, "interrupted build did not exit with 4");
  const auto first = read_json(split_run.path() / "session.json");
  o.require(cli({"build", "--config", fixture("pipeline/config.json").string(), "--out",
                 split_run.path().string(), "--resume"}) == 0,
            "resume failed");
  if (!o.pass) return o;
  const auto second = read_json(split_run.path() / "session.json");
  const auto reference = read_json(whole.path() / "session.json");

  for (const char* file : {"corpus.jsonl", "stats.json"}) {
    o.require(slurp(whole.path() / file) == slurp(split_run.path() / file),
              std::string(file) + " differs after resume");
  }
  const int live = first["live_calls"].get<int>() + second["live_calls"].get<int>();
  o.require(live == reference["live_calls"].get<int>(),
            "live calls " + std::to_string(live) + " vs " + reference["live_calls"].dump());
  const double secs = seconds_since(t0);
  o.require(secs < 10.0, "took " + fmt("%.2f s", secs));
  if (o.pass) {
    o.detail = "live calls " + first["live_calls"].dump() + " + " + second["live_calls"].dump() +
               " = " + reference["live_calls"].dump() + "; " + fmt("%.2f s", secs);
  }
  return o;
}

Outcome normalizer_corpus() {
  Outcome o;
  std::size_t n = 0;
  for (const auto& c : test::kNormCorpus) {
    ++n;
    o.require(normalize(c.input) == c.expected, std::string("mismatch on '") + c.input + "'");
  }
  o.require(n >= 30, "only " + std::to_string(n) + " cases");
  std::mt19937_64 rng(20240611);
  for (int i = 0; i < 1000; ++i) {
    const auto once = normalize(oracle::random_messy(rng));
    o.require(normalize(once) == once, "not idempotent");
  }
  if (o.pass) o.detail = std::to_string(n) + " exact matches; idempotent on 1000 random strings";
  return o;
}

AgreementReport kappa_of(const std::vector<int>& a, const std::vector<int>& b) {
  std::unique_ptr<bool[]> x(new bool[a.size()]), y(new bool[b.size()]);
  for (std::size_t i = 0; i < a.size(); ++i) {
    x[i] = a[i];
    y[i] = b[i];
  }
  return cohen_kappa({x.get(), a.size()}, {y.get(), b.size()});
}

Outcome kappa_oracle() {
  Outcome o;
  std::mt19937_64 rng(1234);
  double worst = 0;
  for (int trial = 0; trial < 500; ++trial) {
    const std::size_t n = 2 + rng() % 200;
    std::bernoulli_distribution da(static_cast<double>(rng() % 101) / 100.0);
    std::bernoulli_distribution agree(static_cast<double>(rng() % 101) / 100.0), coin(0.5);
    std::vector<int> a(n), b(n);
    for (std::size_t i = 0; i < n; ++i) {
      a[i] = da(rng);
      b[i] = agree(rng) ? a[i] : coin(rng);
    }
    const double k = kappa_of(a, b).kappa;
    worst = std::max(worst, std::abs(k - oracle::kappa(a, b)));
    o.require(std::abs(k - kappa_of(b, a).kappa) <= 1e-12, "asymmetric");
    o.require(k >= -1.0 - 1e-12 && k <= 1.0 + 1e-12, "out of bounds");
  }
  o.require(worst <= 1e-12, "max deviation from oracle " + fmt("%.3g", worst));
  const auto fixed = kappa_of({1, 1, 0, 0}, {1, 0, 0, 0});
  o.require(fixed.observed_agreement == 0.75 && fixed.expected_agreement == 0.5,
            "fixture po/pe " + fmt("%.6f", fixed.observed_agreement) + "/" +
                fmt("%.6f", fixed.expected_agreement));
  o.require(std::abs(fixed.kappa - 0.5) <= 1e-12, "fixture kappa " + fmt("%.12f", fixed.kappa));
  if (o.pass) o.detail = "500 pairs, max |diff| " + fmt("%.3g", worst) + "; fixture kappa 0.5";
  return o;
}

Outcome bleu_oracle() {
  Outcome o;
  const std::vector<std::string> vocab{"the", "cat", "sat", "on", "a", "mat", "dog", "ran", ",",
                                       ".", "Big", "big", "red", "!", "it's", "very"};
  std::mt19937_64 rng(42);
  double worst = 0;
  for (int trial = 0; trial < 50; ++trial) {
    const std::size_t n = 1 + rng() % 20;
    std::vector<std::string> hyps, refs;
    for (std::size_t i = 0; i < n; ++i) {
      refs.push_back(oracle::random_words(rng, vocab, 1, 15));
      hyps.push_back(rng() % 3 == 0 ? refs.back() : oracle::random_words(rng, vocab, 0, 15));
    }
    worst = std::max(worst, std::abs(corpus_bleu(hyps, refs) - oracle::bleu(hyps, refs)));
  }
  o.require(worst <= 1e-6, "max deviation from oracle " + fmt("%.3g", worst));
  const std::vector<std::string> refs{"you are not being very smart today", "please stop talking now"};
  const std::vector<std::string> other{"zebra quantum marble sky fox", "lorem ipsum dolor sit"};
  const double identity = corpus_bleu(refs, refs);
  const double disjoint = corpus_bleu(other, refs);
  o.require(std::abs(identity - 1.0) <= 1e-12, "identity " + fmt("%.12f", identity));
  o.require(disjoint <= 1e-6, "disjoint " + fmt("%.3g", disjoint));
  if (o.pass) {
    o.detail = "50 corpora, max |diff| " + fmt("%.3g", worst) + "; identity 1.0; disjoint " +
               fmt("%.3g", disjoint);
  }
  return o;
}

Outcome threshold_boundaries() {
  Outcome o;
  MockScorer scorer(nlohmann::json::parse(R"({
    "dimension": 5,
    "embeddings": {"src": [1, 0, 0, 0, 0], "at70": [7, 1, 5, 5, 0], "at71": [71, 70, 7, 3, 1]},
    "scores": {"toxicity": {"t90": 0.9, "t91": 0.91}}})"));
  const EmbeddingProfile profile{ProfileName::Validation, "/embed", 5};
  const ScoreThresholds th;
  const auto s70 = similarity_label("src", "at70", scorer, profile, th);
  const auto s71 = similarity_label("src", "at71", scorer, profile, th);
  o.require(s70.score == 0.70 && !s70.same_meaning, "similarity 0.70 not No");
  o.require(s71.score == 0.71 && s71.same_meaning, "similarity 0.71 not Yes");
  o.require(!toxicity_label("t90", scorer, th).toxic, "toxicity 0.9 not NonToxic");
  o.require(toxicity_label("t91", scorer, th).toxic, "toxicity 0.91 not Toxic");
  if (o.pass) o.detail = "0.70 -> No, 0.71 -> Yes, 0.9 -> NonToxic, 0.91 -> Toxic";
  return o;
}

Outcome cost_and_ledger() {
  Outcome o;
  UsageLedger reported;
  reported.add("paraphrase", 19'153'000, 0);
  const auto cost = estimate_cost(reported, Pricing{0.15, 0.0});
  o.require(cost.display() == "$2.873", "input cost " + cost.display());

  std::mt19937_64 rng(99);
  const std::vector<std::string> tasks{"paraphrase", "content_check", "toxicity_check"};
  for (int trial = 0; trial < 100; ++trial) {
    UsageLedger whole, left, right;
    std::int64_t in = 0, out = 0;
    const int calls = static_cast<int>(rng() % 40);
    for (int i = 0; i < calls; ++i) {
      const auto& t = tasks[rng() % tasks.size()];
      const auto a = static_cast<std::int64_t>(rng() % 5000);
      const auto b = static_cast<std::int64_t>(rng() % 500);
      whole.add(t, a, b);
      (i % 2 ? left : right).add(t, a, b);
      in += a;
      out += b;
    }
    std::int64_t sum_in = 0, sum_out = 0;
    for (const auto& [task, c] : whole.per_task()) {
      sum_in += c.input;
      sum_out += c.output;
    }
    left.merge(right);
    o.require(whole.total_input_tokens() == in && whole.total_output_tokens() == out,
              "totals drift");
    o.require(sum_in == in && sum_out == out, "per-task sums drift");
    o.require(left == whole, "merge not additive");
  }
  if (o.pass) o.detail = "19,153,000 tokens at $0.15/M -> " + cost.display() + "; 100 sequences additive";
  return o;
}

Outcome split_rule() {
  Outcome o;
  const SplitSpec spec;
  const auto s = split_sizes(8276, spec);
  o.require(s.train == 6622 && s.val == 827 && s.test == 827,
            "8276 -> " + std::to_string(s.train) + "/" + std::to_string(s.val) + "/" +
                std::to_string(s.test));
  std::mt19937_64 rng(3);
  for (int trial = 0; trial < 200 && o.pass; ++trial) {
    const std::size_t n = 3 + rng() % 500;
    std::vector<ParallelPair> pairs;
    for (std::size_t i = 0; i < n; ++i) pairs.push_back({"p" + std::to_string(i), "t", "d", "s", {}, "v"});
    SplitSpec sp;
    sp.seed = rng();
    const auto parts = split(pairs, sp);
    std::set<std::string> ids;
    std::size_t total = 0;
    for (const auto* part : {&parts.train, &parts.val, &parts.test}) {
      for (const auto& p : *part) {
        ids.insert(p.id);
        ++total;
      }
    }
    o.require(total == n && ids.size() == n, "n = " + std::to_string(n) + " not a partition");
    const auto again = split(pairs, sp);
    o.require(again.train == parts.train && again.val == parts.val && again.test == parts.test,
              "same seed, different split");
  }
  if (o.pass) o.detail = "8276 -> 6622/827/827; 200 random n partitioned; seed-deterministic";
  return o;
}

// Scorer with constant outputs.
class ConstScorer : public Scorer {
 public:
  ConstScorer(double style, double fluency) : style_(style), fluency_(fluency) {}
  std::string id() const override { return "const"; }
  std::vector<Embedding> embed(const std::vector<std::string>& texts, ProfileName) override {
    return std::vector<Embedding>(texts.size(), Embedding{0.3, -1.0, 2.0});
  }
  std::vector<double> score(const std::vector<std::string>& texts, ScoreKind kind) override {
    return std::vector<double>(texts.size(), kind == ScoreKind::Style ? style_ : fluency_);
  }

 private:
  double style_, fluency_;
};

Outcome baselines() {
  Outcome o;
  std::mt19937_64 rng(8);
  for (int i = 0; i < 1000; ++i) {
    const auto s = oracle::random_messy(rng);
    o.require(baseline_duplicate(s) == s, "duplicate changed its input");
  }
  const auto lexicon = load_lexicon(fixture("eval/lexicon.txt"));
  const auto items = read_eval_items(fixture("eval/toxic.txt"), true);
  const std::vector<std::string> hand{"you", "shut up,", "have a nice day"};
  o.require(items.size() == hand.size(), "fixture size");
  for (std::size_t i = 0; i < hand.size() && i < items.size(); ++i) {
    const auto got = baseline_delete(items[i].toxic, lexicon);
    o.require(got == hand[i], "delete('" + items[i].toxic + "') = '" + got + "'");
  }

  std::vector<EvalItem> dup;
  std::vector<std::string> refs;
  for (const auto& it : items) {
    dup.push_back({it.id, it.toxic, baseline_duplicate(it.toxic)});
    refs.push_back(it.toxic);
  }
  ConstScorer flat(0.0, 1.0), worst(1.0, 0.0);
  MockScorer hashed;
  for (Scorer* s : std::vector<Scorer*>{&flat, &worst, &hashed}) {
    const auto report = evaluate(dup, refs, *s);
    o.require(report.content_preservation == 1.0,
              s->id() + " content_preservation " + fmt("%.12f", report.content_preservation));
  }
  if (o.pass) o.detail = "duplicate identity x1000; delete matches 3 hand outputs; duplicate CP = 1.00";
  return o;
}

Outcome rate_limiting() {
  Outcome o;
  auto backend = std::make_shared<MockBackend>(
      nlohmann::json::parse(R"({"rules": [{"contains": "", "response": "ok"}]})"));
  ClientOptions opts;
  opts.cache_enabled = false;
  opts.rate_limit_per_second = 5;
  ChatClient client(backend, opts);
  for (int i = 0; i < 50; ++i) {
    ChatRequest r;
    r.user = "call " + std::to_string(i);
    r.task_tag = "paraphrase";
    client.complete(r);
  }
  const auto log = backend->dispatch_log();
  o.require(log.size() == 50, "expected 50 dispatches, got " + std::to_string(log.size()));
  std::size_t busiest = 0;
  for (std::size_t i = 0; i < log.size(); ++i) {
    std::size_t in_window = 0;
    for (std::size_t j = i; j < log.size() && log[j].at - log[i].at < std::chrono::seconds(1); ++j) {
      ++in_window;
    }
    busiest = std::max(busiest, in_window);
  }
  o.require(busiest <= 5, "busiest 1 s window held " + std::to_string(busiest));
  if (o.pass) o.detail = "50 calls, busiest 1 s window " + std::to_string(busiest);
  return o;
}

}  // namespace

int main() {
  const std::vector<std::pair<const char*, std::function<Outcome()>>> checks{
      {"scripted-mock end-to-end", scripted_end_to_end},
      {"resume equivalence", resume_equivalence},
      {"normalizer corpus", normalizer_corpus},
      {"kappa oracle", kappa_oracle},
      {"bleu oracle", bleu_oracle},
      {"threshold boundaries", threshold_boundaries},
      {"cost and ledger", cost_and_ledger},
      {"split", split_rule},
      {"baselines", baselines},
      {"rate limiting", rate_limiting},
  };
  int failed = 0;
  for (const auto& [name, check] : checks) {
    Outcome o;
    try {
      o = check();
    } catch (const std::exception& e) {
      o.pass = false;
      o.detail = std::string("exception: ") + e.what();
    }
    std::cout << (o.pass ? "PASS " : "FAIL ") << name << ": " << o.detail << std::endl;
    if (!o.pass) ++failed;
  }
  std::cout << (checks.size() - failed) << "/" << checks.size() << " criteria passed" << std::endl;
  return failed == 0 ? 0 : 1;
}
