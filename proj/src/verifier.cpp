#include "agenteval/verifier.hpp"

#include <cmath>

#include "agenteval/dedup.hpp"
#include "agenteval/errors.hpp"
#include "agenteval/perturb.hpp"
#include "agenteval/quantifier.hpp"
#include "agenteval/report.hpp"
#include "agenteval/util.hpp"

namespace agenteval {

namespace {

nlohmann::ordered_json number_or_null(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

std::optional<double> optional_number(const nlohmann::json& j, const char* key) {
  if (!j.contains(key) || j[key].is_null()) return std::nullopt;
  if (!j[key].is_number()) throw FormatError(std::string("verified: ") + key + " must be a number");
  return j[key].get<double>();
}

VerdictKind verdict_from_string(std::string_view s) {
  if (s == "kept") return VerdictKind::kKept;
  if (s == "dropped_unstable") return VerdictKind::kDroppedUnstable;
  if (s == "dropped_adversarial") return VerdictKind::kDroppedAdversarial;
  throw FormatError("unknown verdict: " + std::string(s));
}

}  // namespace

void check_verifier_config(const VerifierConfig& cfg) {
  if (cfg.critic_runs < 1) throw PreconditionError("critic_runs must be >= 1");
  // the stability report needs two seeds to say anything
  if (cfg.quantifier_seeds < 2) throw PreconditionError("quantifier_seeds must be >= 2");
  check_dedup_config({cfg.tau});
  if (!(cfg.cv_threshold > 0.0)) throw PreconditionError("cv_threshold must be > 0");
  if (!(cfg.disturb_fraction > 0.0 && cfg.disturb_fraction < 1.0)) {
    throw PreconditionError("disturb_fraction must lie in (0, 1)");
  }
  if (cfg.examples_per_prompt < 0) throw PreconditionError("examples_per_prompt must be >= 0");
}

std::string_view to_string(VerdictKind v) {
  switch (v) {
    case VerdictKind::kKept:
      return "kept";
    case VerdictKind::kDroppedUnstable:
      return "dropped_unstable";
    case VerdictKind::kDroppedAdversarial:
      return "dropped_adversarial";
  }
  return "kept";
}

std::set<std::string> stability_filter(const StabilityReport& report, const VerifierConfig& cfg) {
  std::set<std::string> kept;
  for (const auto& c : report.criteria) {
    if (c.mean_cv && *c.mean_cv <= cfg.cv_threshold) kept.insert(c.criterion);
  }
  return kept;
}

std::set<std::string> adversarial_filter(const DiscriminativeReport& report, const VerifierConfig& cfg) {
  std::set<std::string> kept;
  for (const auto& row : report.rows) {
    if (row.passed || !cfg.require_adversarial_pass) kept.insert(row.criterion);
  }
  return kept;
}

VerifiedCriteriaSet assemble_verdicts(const CriteriaSet& candidates, const StabilityReport& stability,
                                      const DiscriminativeReport* disc, const VerifierConfig& cfg) {
  const auto stable = stability_filter(stability, cfg);
  std::set<std::string> adversarial_ok;
  if (disc != nullptr) adversarial_ok = adversarial_filter(*disc, cfg);

  VerifiedCriteriaSet out;
  out.final_set.task_name = candidates.task_name;
  out.final_set.provenance = Provenance::kVerified;
  for (const auto& c : candidates.criteria) {
    const CriterionStability* st = stability.find(c.name);
    if (st == nullptr) throw PreconditionError("stability report does not cover " + c.name);
    CriterionVerdict v;
    v.criterion = c.name;
    v.mean_cv = st->mean_cv;
    if (!stable.contains(st->criterion)) {
      v.kind = VerdictKind::kDroppedUnstable;
      v.annotation = st->mean_cv ? "mean CV above threshold" : "UNSTABLE";
      out.verdicts.push_back(std::move(v));
      continue;
    }
    const DiscriminativeRow* row = disc == nullptr ? nullptr : disc->find(c.name);
    if (row == nullptr) throw PreconditionError("discriminative report does not cover " + c.name);
    v.mean_original = row->mean_original;
    v.mean_disturbed = row->mean_disturbed;
    if (!adversarial_ok.contains(row->criterion)) {
      v.kind = VerdictKind::kDroppedAdversarial;
      v.annotation = "disturbed samples score as high or higher";
    } else {
      v.kind = VerdictKind::kKept;
      if (!row->passed) v.annotation = "adversarial check not passed (not required)";
      out.final_set.criteria.push_back(c);
    }
    out.verdicts.push_back(std::move(v));
  }
  return out;
}

nlohmann::ordered_json config_to_json(const VerifierConfig& cfg) {
  nlohmann::ordered_json j;
  j["critic_runs"] = cfg.critic_runs;
  j["quantifier_seeds"] = cfg.quantifier_seeds;
  j["tau"] = cfg.tau;
  if (std::isfinite(cfg.cv_threshold)) {
    j["cv_threshold"] = cfg.cv_threshold;
  } else {
    j["cv_threshold"] = "inf";
  }
  j["disturb_fraction"] = cfg.disturb_fraction;
  j["require_adversarial_pass"] = cfg.require_adversarial_pass;
  j["critic_mode"] = cfg.critic_mode == CriticMode::kTaskBased ? "task_based" : "solution_based";
  j["examples_per_prompt"] = cfg.examples_per_prompt;
  j["seed_base"] = cfg.seed_base;
  j["bucket_size"] = cfg.bucket_size;
  j["dedup_before_summary"] = cfg.dedup_before_summary;
  return j;
}

nlohmann::ordered_json verified_to_json(const VerifiedCriteriaSet& v, const VerifierConfig& cfg) {
  nlohmann::ordered_json j;
  j["final"] = criteria_to_json(v.final_set);
  j["verdicts"] = nlohmann::ordered_json::array();
  for (const auto& d : v.verdicts) {
    nlohmann::ordered_json dj;
    dj["criterion"] = d.criterion;
    dj["verdict"] = to_string(d.kind);
    dj["mean_cv"] = d.mean_cv ? nlohmann::ordered_json(*d.mean_cv) : nlohmann::ordered_json("UNSTABLE");
    dj["mean_original"] = number_or_null(d.mean_original);
    dj["mean_disturbed"] = number_or_null(d.mean_disturbed);
    dj["annotation"] = d.annotation;
    j["verdicts"].push_back(std::move(dj));
  }
  j["thresholds"] = config_to_json(cfg);
  j["provenance"] = v.provenance;
  return j;
}

std::string serialize_verified(const VerifiedCriteriaSet& v, const VerifierConfig& cfg) {
  return verified_to_json(v, cfg).dump(2) + "\n";
}

VerifiedCriteriaSet parse_verified(std::string_view text) {
  const auto j = nlohmann::json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded() || !j.is_object()) throw FormatError("verified: malformed JSON");
  VerifiedCriteriaSet v;
  try {
    v.final_set = criteria_from_json(j.at("final"));
    for (const auto& dj : j.at("verdicts")) {
      CriterionVerdict d;
      d.criterion = dj.at("criterion").get<std::string>();
      d.kind = verdict_from_string(dj.at("verdict").get<std::string>());
      const auto& cv = dj.at("mean_cv");
      if (cv.is_number()) d.mean_cv = cv.get<double>();
      d.mean_original = optional_number(dj, "mean_original");
      d.mean_disturbed = optional_number(dj, "mean_disturbed");
      d.annotation = dj.value("annotation", std::string{});
      v.verdicts.push_back(std::move(d));
    }
    if (j.contains("provenance")) v.provenance = j["provenance"].get<std::vector<std::string>>();
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(std::string("verified: ") + e.what());
  }
  return v;
}

VerifyOutcome verify(const TaskSpec& task, std::span<const TaskSample> corpus, const VerifierConfig& cfg,
                     const AgentContext& ctx, EmbeddingProvider& embedder, const std::filesystem::path& out_dir,
                     const std::string& run_id, bool overwrite) {
  if (corpus.empty()) throw PreconditionError("verify needs a non-empty corpus");
  check_verifier_config(cfg);
  if (!ctx.chat || !ctx.prompts) throw PreconditionError("verify needs a chat backend and prompts");

  VerifyOutcome out;
  RunBundle& run = out.run;
  run.run_id = run_id;
  run.parameters = config_to_json(cfg);
  run.parameters["task_name"] = task.name;
  run.parameters["corpus_size"] = corpus.size();
  run.parameters["model"] = ctx.model;
  run.parameters["backend"] = ctx.chat->id();
  run.parameters["embedder"] = embedder.id();

  const std::vector<TaskSample> samples(corpus.begin(), corpus.end());
  run.put("task.json", "task", serialize_task(task));
  run.put_samples("samples.jsonl", samples);

  CriticConfig cc;
  cc.mode = cfg.critic_mode;
  cc.runs = cfg.critic_runs;
  cc.examples_per_prompt = cfg.examples_per_prompt;
  cc.seed_base = cfg.seed_base;
  const CriticBatch batch = run_critic_batch(task, corpus, cc, ctx);
  run.put("critic_runs.jsonl", "criteria_runs", serialize_criteria_lines(batch.sets));
  run.put("critic_audit.jsonl", "audit", serialize_audit(batch.audit));

  CriteriaSet candidates;
  if (cfg.dedup_before_summary) {
    auto [deduped, dedup_report] = dedup_criteria(merge_exact_names(batch.sets), {cfg.tau}, embedder);
    run.put_json("dedup_report.json", "dedup_report", dedup_report_to_json(dedup_report));
    const std::vector<CriteriaSet> one{deduped};
    SummaryResult summary = summarize_criteria(one, task, &ctx, cfg.seed_base);
    run.put_criteria("summarized.json", summary.criteria);
    run.put("summary_audit.jsonl", "audit", serialize_audit(summary.audit));
    candidates = std::move(summary.criteria);
  } else {
    const SummaryResult summary = summarize_criteria(batch.sets, task, &ctx, cfg.seed_base);
    run.put_criteria("summarized.json", summary.criteria);
    run.put("summary_audit.jsonl", "audit", serialize_audit(summary.audit));
    auto [deduped, dedup_report] = dedup_criteria(summary.criteria, {cfg.tau}, embedder);
    run.put_json("dedup_report.json", "dedup_report", dedup_report_to_json(dedup_report));
    candidates = std::move(deduped);
  }
  run.put_criteria("criteria.json", candidates);

  QuantifyConfig qc;
  qc.seeds = cfg.quantifier_seeds;
  qc.bucket_size = cfg.bucket_size;
  const auto records = sweep_seeds(task, candidates, corpus, qc, ctx);
  run.put_records("quantified.jsonl", records);

  const StabilityReport stability = stability_report(records, candidates);
  run.put_json("stability.json", "stability", to_json(stability));
  const auto stable = stability_filter(stability, cfg);

  CriteriaSet survivors = candidates;
  survivors.criteria.clear();
  for (const auto& c : candidates.criteria) {
    if (stable.contains(c.name)) survivors.criteria.push_back(c);
  }

  const auto disturbed = disturb_corpus(corpus, {cfg.disturb_fraction, cfg.seed_base});
  run.put_samples("disturbed.jsonl", disturbed);

  std::optional<DiscriminativeReport> disc;
  std::vector<QuantifiedRecord> disturbed_records;
  if (!survivors.criteria.empty()) {
    disturbed_records = sweep_seeds(task, survivors, disturbed, qc, ctx);
    disc = discriminative_power(records, disturbed_records, survivors);
  }
  run.put_records("quantified_disturbed.jsonl", disturbed_records);
  run.put_json("discriminative.json", "discriminative",
               disc ? to_json(*disc) : nlohmann::ordered_json::array());

  out.verified = assemble_verdicts(candidates, stability, disc ? &*disc : nullptr, cfg);
  out.verified.final_set.task_name = task.name;
  out.verified.provenance = {run_id};
  run.put("verified.json", "verified", serialize_verified(out.verified, cfg));

  attach_report(run, render(run, embedder));
  if (!out_dir.empty()) out.manifest = save_run(run, out_dir, overwrite);
  return out;
}

}  // namespace agenteval
