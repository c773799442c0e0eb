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

#include "detox/pipeline.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <memory>
#include <random>

#include "detox/error.hpp"
#include "detox/hash.hpp"
#include "detox/time_util.hpp"

namespace detox {

namespace {

struct StatusName {
  Status status;
  const char* name;
};

constexpr StatusName kStatusNames[] = {
    {Status::Pending, "Pending"},           {Status::RefusedOnce, "RefusedOnce"},
    {Status::Paraphrased, "Paraphrased"},   {Status::ContentPassed, "ContentPassed"},
    {Status::RefusedFinal, "RefusedFinal"}, {Status::ContentFail, "ContentFail"},
    {Status::ToxicFail, "ToxicFail"},       {Status::VerdictError, "VerdictError"},
    {Status::Accepted, "Accepted"},
};

}  // namespace

std::string_view to_string(Status status) {
  for (const auto& s : kStatusNames) {
    if (s.status == status) return s.name;
  }
  return "Unknown";
}

Status status_from_string(std::string_view name) {
  for (const auto& s : kStatusNames) {
    if (name == s.name) return s.status;
  }
  throw ArgumentError("unknown status '" + std::string(name) + "'");
}

bool is_terminal(Status status) {
  switch (status) {
    case Status::RefusedFinal:
    case Status::ContentFail:
    case Status::ToxicFail:
    case Status::VerdictError:
    case Status::Accepted:
      return true;
    default:
      return false;
  }
}

const std::vector<Status>& terminal_statuses() {
  static const std::vector<Status> kTerminal{Status::RefusedFinal, Status::ContentFail,
                                             Status::ToxicFail, Status::VerdictError,
                                             Status::Accepted};
  return kTerminal;
}

AnnotationRecord AnnotationRecord::pending(const CleanSample& sample) {
  AnnotationRecord r;
  r.sample_id = sample.id;
  r.source = sample.source;
  r.toxic_text = sample.text;
  r.created_at = utc_now_iso();
  r.updated_at = r.created_at;
  return r;
}

namespace {

nlohmann::json optional_number(const std::optional<double>& v) {
  return v ? nlohmann::json(*v) : nlohmann::json(nullptr);
}

std::optional<double> read_optional_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  return j[key].get<double>();
}

}  // namespace

void to_json(nlohmann::json& j, const AnnotationRecord& r) {
  j = nlohmann::json{
      {"sample_id", r.sample_id},
      {"source", r.source},
      {"toxic_text", r.toxic_text},
      {"paraphrase", r.paraphrase ? nlohmann::json(*r.paraphrase) : nlohmann::json(nullptr)},
      {"attempts", r.attempts},
      {"task2_verdict", r.task2_verdict ? nlohmann::json(*r.task2_verdict) : nlohmann::json(nullptr)},
      {"task3_verdict", r.task3_verdict ? nlohmann::json(*r.task3_verdict) : nlohmann::json(nullptr)},
      {"validation_scores",
       {{"content_sim", optional_number(r.scores.content_sim)},
        {"toxicity", optional_number(r.scores.toxicity)}}},
      {"status", std::string(to_string(r.status))},
      {"error", r.error ? nlohmann::json(*r.error) : nlohmann::json(nullptr)},
      {"revision", r.revision},
      {"created_at", r.created_at},
      {"updated_at", r.updated_at},
  };
}

void from_json(const nlohmann::json& j, AnnotationRecord& r) {
  r = AnnotationRecord{};
  j.at("sample_id").get_to(r.sample_id);
  r.source = j.value("source", "");
  j.at("toxic_text").get_to(r.toxic_text);
  if (j.contains("paraphrase") && !j["paraphrase"].is_null()) r.paraphrase = j["paraphrase"].get<std::string>();
  if (j.contains("attempts")) j["attempts"].get_to(r.attempts);
  if (j.contains("task2_verdict") && !j["task2_verdict"].is_null()) {
    r.task2_verdict = j["task2_verdict"].get<Verdict>();
  }
  if (j.contains("task3_verdict") && !j["task3_verdict"].is_null()) {
    r.task3_verdict = j["task3_verdict"].get<Verdict>();
  }
  if (j.contains("validation_scores")) {
    const auto& s = j["validation_scores"];
    r.scores.content_sim = read_optional_number(s, "content_sim");
    r.scores.toxicity = read_optional_number(s, "toxicity");
  }
  r.status = status_from_string(j.at("status").get<std::string>());
  if (j.contains("error") && !j["error"].is_null()) r.error = j["error"].get<std::string>();
  r.revision = j.value("revision", 0);
  r.created_at = j.value("created_at", "");
  r.updated_at = j.value("updated_at", "");
}

void to_json(nlohmann::json& j, const ParallelPair& p) {
  j = nlohmann::json{{"id", p.id},
                     {"toxic", p.toxic},
                     {"detoxified", p.detoxified},
                     {"source", p.source},
                     {"validation_scores",
                      {{"content_sim", optional_number(p.validation_scores.content_sim)},
                       {"toxicity", optional_number(p.validation_scores.toxicity)}}},
                     {"pipeline_version", p.pipeline_version}};
}

namespace {

nlohmann::json optional_report(const std::optional<AgreementReport>& r) {
  return r ? nlohmann::json(*r) : nlohmann::json(nullptr);
}

}  // namespace

void to_json(nlohmann::json& j, const RunStats& s) {
  nlohmann::json counts = nlohmann::json::object();
  for (auto st : terminal_statuses()) counts[std::string(to_string(st))] = s.count(st);
  j = nlohmann::json{
      {"input", s.input},
      {"status_counts", counts},
      {"in_progress", s.in_progress},
      {"funnel",
       {{"input", s.input},
        {"paraphrased", s.paraphrased},
        {"task2_passed", s.task2_passed},
        {"task3_evaluated", s.task3_evaluated},
        {"accepted", s.accepted}}},
      {"refusal_first_pass", s.refusal_first_pass},
      {"refusal_recovered", s.refusal_recovered},
      {"usage", s.usage},
      {"cost",
       {{"input", s.cost.input},
        {"output", s.cost.output},
        {"total", s.cost.total},
        {"display", s.cost.display()}}},
      {"agreement",
       {{"content", optional_report(s.content_agreement)},
        {"toxicity", optional_report(s.toxicity_agreement)}}},
  };
}

void from_json(const nlohmann::json& j, RunStats& s) {
  s = RunStats{};
  s.input = j.at("input").get<std::size_t>();
  for (const auto& [name, n] : j.at("status_counts").items()) {
    s.status_counts[status_from_string(name)] = n.get<std::size_t>();
  }
  s.in_progress = j.value("in_progress", std::size_t{0});
  const auto& f = j.at("funnel");
  s.paraphrased = f.at("paraphrased").get<std::size_t>();
  s.task2_passed = f.at("task2_passed").get<std::size_t>();
  s.task3_evaluated = f.at("task3_evaluated").get<std::size_t>();
  s.accepted = f.at("accepted").get<std::size_t>();
  s.refusal_first_pass = j.at("refusal_first_pass").get<std::size_t>();
  s.refusal_recovered = j.at("refusal_recovered").get<std::size_t>();
  s.usage = j.at("usage").get<UsageLedger>();
  const auto& c = j.at("cost");
  s.cost.input = c.at("input").get<double>();
  s.cost.output = c.at("output").get<double>();
  s.cost.total = c.at("total").get<double>();
  const auto& a = j.at("agreement");
  if (!a.at("content").is_null()) s.content_agreement = a["content"].get<AgreementReport>();
  if (!a.at("toxicity").is_null()) s.toxicity_agreement = a["toxicity"].get<AgreementReport>();
}

namespace {

bool has_primary_refusal(const AnnotationRecord& r) {
  return std::any_of(r.attempts.begin(), r.attempts.end(), [](const Attempt& a) {
    return a.task == "paraphrase" && a.variant == "primary" && a.outcome == "refusal";
  });
}

CleanSample sample_of(const AnnotationRecord& r) {
  return CleanSample{r.sample_id, r.source, r.toxic_text, r.toxic_text};
}

void take_paraphrase(AnnotationRecord& next, const ParaphraseResult& result, Status on_refusal) {
  next.attempts.push_back(result.attempt);
  if (result.refused()) {
    next.status = on_refusal;
  } else {
    next.paraphrase = result.text;
    next.status = Status::Paraphrased;
  }
}

}  // namespace

AnnotationRecord step(const AnnotationRecord& record, const StepContext& ctx) {
  if (is_terminal(record.status)) {
    throw ArgumentError("record '" + record.sample_id + "' is already terminal (" +
                        std::string(to_string(record.status)) + ")");
  }
  AnnotationRecord next = record;
  const auto& thresholds = ctx.config.thresholds;
  switch (record.status) {
    case Status::Pending:
      take_paraphrase(next, ctx.annotator.task1_paraphrase(sample_of(record), Variant::Primary),
                      Status::RefusedOnce);
      break;

    case Status::RefusedOnce:
      if (!has_primary_refusal(record)) {
        throw ArgumentError("record '" + record.sample_id +
                            "' is RefusedOnce without a primary refusal");
      }
      take_paraphrase(next, ctx.annotator.task1_paraphrase(sample_of(record), Variant::Fallback),
                      Status::RefusedFinal);
      break;

    case Status::Paraphrased: {
      const std::string& detox = next.paraphrase.value();
      if (ctx.scorer != nullptr) {
        next.scores.content_sim = similarity_label(record.toxic_text, detox, *ctx.scorer,
                                                   ctx.config.validation_profile(), thresholds)
                                      .score;
      }
      auto verdict = ctx.annotator.task2_content_check(record.toxic_text, detox);
      next.attempts.insert(next.attempts.end(), verdict.attempts.begin(), verdict.attempts.end());
      if (!verdict.verdict) {
        next.status = Status::VerdictError;
        next.error = "content check: no parseable Yes/No verdict after re-ask";
        break;
      }
      next.task2_verdict = *verdict.verdict;
      bool pass = next.task2_verdict->yes();
      if (pass && ctx.config.gating == GatingPolicy::Conjunctive) {
        if (!next.scores.content_sim) throw GateError("conjunctive gate needs a content similarity");
        pass = similarity_passes(*next.scores.content_sim, thresholds);
      }
      next.status = pass ? Status::ContentPassed : Status::ContentFail;
      break;
    }

    case Status::ContentPassed: {
      const std::string& detox = next.paraphrase.value();
      if (ctx.scorer != nullptr) {
        next.scores.toxicity = toxicity_label(detox, *ctx.scorer, thresholds).score;
      }
      auto verdict = ctx.annotator.task3_toxicity_check(detox);
      next.attempts.insert(next.attempts.end(), verdict.attempts.begin(), verdict.attempts.end());
      if (!verdict.verdict) {
        next.status = Status::VerdictError;
        next.error = "toxicity check: no parseable Yes/No verdict after re-ask";
        break;
      }
      next.task3_verdict = *verdict.verdict;
      next.status = apply_gate(next, ctx.config.gating, thresholds) ? Status::Accepted
                                                                    : Status::ToxicFail;
      break;
    }

    default:
      break;
  }
  next.revision = record.revision + 1;
  next.updated_at = utc_now_iso();
  return next;
}

AnnotationRecord annotate(AnnotationRecord record, const StepContext& ctx) {
  while (!is_terminal(record.status)) record = step(record, ctx);
  return record;
}

bool apply_gate(const AnnotationRecord& record, GatingPolicy policy,
                const ScoreThresholds& thresholds) {
  if (!record.task2_verdict || !record.task3_verdict) {
    throw GateError("record '" + record.sample_id + "' lacks a verdict");
  }
  if (!record.task2_verdict->yes() || record.task3_verdict->yes()) return false;
  if (policy == GatingPolicy::LlmVerdict) return true;
  if (!record.scores.content_sim || !record.scores.toxicity) {
    throw GateError("record '" + record.sample_id + "' lacks validation scores for the conjunctive gate");
  }
  return similarity_passes(*record.scores.content_sim, thresholds) &&
         !toxicity_flags(*record.scores.toxicity, thresholds);
}

SplitSizes split_sizes(std::size_t n, const SplitSpec& spec) {
  spec.validate();
  // The small epsilon keeps exact products such as 100 * 0.1 from landing
  // one below the integer.
  SplitSizes s;
  s.val = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.val + 1e-9));
  s.test = static_cast<std::size_t>(std::floor(static_cast<double>(n) * spec.test + 1e-9));
  s.train = n - s.val - s.test;
  return s;
}

namespace {

// Uniform integer in [0, bound] by rejection, independent of the standard
// library's distribution implementation.
std::uint64_t bounded(std::mt19937_64& rng, std::uint64_t bound) {
  if (bound == 0) return 0;
  const std::uint64_t range = bound + 1;
  if (range == 0) return rng();
  const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                              std::numeric_limits<std::uint64_t>::max() % range;
  std::uint64_t x;
  do {
    x = rng();
  } while (x >= limit);
  return x % range;
}

}  // namespace

SplitResult split(const std::vector<ParallelPair>& pairs, const SplitSpec& spec) {
  if (pairs.size() < 3) {
    throw ArgumentError("split needs at least 3 pairs, got " + std::to_string(pairs.size()));
  }
  const auto sizes = split_sizes(pairs.size(), spec);
  std::vector<std::size_t> order(pairs.size());
  for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
  std::mt19937_64 rng(spec.seed);
  for (std::size_t i = order.size() - 1; i > 0; --i) {
    std::swap(order[i], order[bounded(rng, i)]);
  }
  SplitResult out;
  for (std::size_t k = 0; k < order.size(); ++k) {
    const auto& p = pairs[order[k]];
    if (k < sizes.train) {
      out.train.push_back(p);
    } else if (k < sizes.train + sizes.val) {
      out.val.push_back(p);
    } else {
      out.test.push_back(p);
    }
  }
  return out;
}

AgreementReports compute_agreement(const std::vector<AnnotationRecord>& records,
                                   const ScoreThresholds& thresholds) {
  if (records.size() < 2) {
    throw ArgumentError("agreement needs at least 2 records, got " + std::to_string(records.size()));
  }
  std::vector<char> c_llm, c_score, t_llm, t_score;
  for (const auto& r : records) {
    if (r.task2_verdict && r.scores.content_sim) {
      c_llm.push_back(r.task2_verdict->yes());
      c_score.push_back(similarity_passes(*r.scores.content_sim, thresholds));
    }
    if (r.task3_verdict && r.scores.toxicity) {
      t_llm.push_back(r.task3_verdict->yes());
      t_score.push_back(toxicity_flags(*r.scores.toxicity, thresholds));
    }
  }
  auto report = [](const std::vector<char>& a, const std::vector<char>& b) -> std::optional<AgreementReport> {
    if (a.size() < 2) return std::nullopt;
    std::unique_ptr<bool[]> x(new bool[a.size()]);
    std::unique_ptr<bool[]> y(new bool[b.size()]);
    for (std::size_t i = 0; i < a.size(); ++i) {
      x[i] = a[i] != 0;
      y[i] = b[i] != 0;
    }
    return cohen_kappa(std::span<const bool>(x.get(), a.size()),
                       std::span<const bool>(y.get(), b.size()));
  };
  return AgreementReports{report(c_llm, c_score), report(t_llm, t_score)};
}

RunStats fold_stats(const std::vector<AnnotationRecord>& records, const PipelineConfig& config) {
  RunStats s;
  for (auto st : terminal_statuses()) s.status_counts[st] = 0;
  s.input = records.size();
  for (const auto& r : records) {
    if (is_terminal(r.status)) {
      ++s.status_counts[r.status];
    } else {
      ++s.in_progress;
    }
    if (r.paraphrase) ++s.paraphrased;
    if (r.task2_verdict && r.task2_verdict->yes() && r.status != Status::ContentFail) ++s.task2_passed;
    if (r.task3_verdict) ++s.task3_evaluated;
    if (r.status == Status::Accepted) ++s.accepted;
    bool primary_refused = false;
    bool fallback_ok = false;
    for (const auto& a : r.attempts) {
      s.usage.add(a.task, a.input_tokens, a.output_tokens);
      if (a.task != "paraphrase") continue;
      if (a.variant == "primary" && a.outcome == "refusal") primary_refused = true;
      if (a.variant == "fallback" && a.outcome == "paraphrase") fallback_ok = true;
    }
    if (primary_refused) ++s.refusal_first_pass;
    if (fallback_ok) ++s.refusal_recovered;
  }
  s.cost = estimate_cost(s.usage, config.pricing);
  if (records.size() >= 2) {
    auto agreement = compute_agreement(records, config.thresholds);
    s.content_agreement = agreement.content;
    s.toxicity_agreement = agreement.toxicity;
  }
  return s;
}

std::string samples_digest(const std::vector<CleanSample>& samples) {
  return sha256_hex(nlohmann::json(samples).dump());
}

std::string pipeline_version(const PipelineConfig& config) {
  return "detox-" + config.hash().substr(0, 12);
}

std::string tsv_cell(std::string_view text) {
  std::string out(text);
  for (auto& c : out) {
    if (c == '\t' || c == '\n' || c == '\r') c = ' ';
  }
  return out;
}

}  // namespace detox
