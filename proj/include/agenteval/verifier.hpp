#pragma once
// End-to-end verification: critic batch, summary, dedup, multi-seed sweep,
// stability filter, disturbance, sweep of the survivors on the disturbed
// corpus, adversarial filter.

#include <cstdint>
#include <filesystem>
#include <optional>
#include <set>
#include <span>
#include <string>
#include <vector>

#include "agenteval/analytics.hpp"
#include "agenteval/context.hpp"
#include "agenteval/critic.hpp"
#include "agenteval/run_store.hpp"
#include "agenteval/samples.hpp"
#include "json.hpp"

namespace agenteval {

struct VerifierConfig {
  int critic_runs = 50;
  int quantifier_seeds = 18;
  double tau = 0.85;
  double cv_threshold = 0.5;  // inclusive; may be +infinity
  double disturb_fraction = 0.25;
  bool require_adversarial_pass = true;

  CriticMode critic_mode = CriticMode::kTaskBased;
  int examples_per_prompt = 2;
  std::uint64_t seed_base = 0;
  std::size_t bucket_size = 0;
  // Similarity dedup of the exact-name union before the summary instead of
  // after it.
  bool dedup_before_summary = false;
};

// Throws PreconditionError on out-of-range values.
void check_verifier_config(const VerifierConfig& cfg);

enum class VerdictKind { kKept, kDroppedUnstable, kDroppedAdversarial };

std::string_view to_string(VerdictKind v);

struct CriterionVerdict {
  std::string criterion;
  VerdictKind kind = VerdictKind::kKept;
  CvValue mean_cv;
  std::optional<double> mean_original;
  std::optional<double> mean_disturbed;
  std::string annotation;
};

struct VerifiedCriteriaSet {
  CriteriaSet final_set;  // provenance verified
  std::vector<CriterionVerdict> verdicts;
  std::vector<std::string> provenance;  // run ids this set was derived from
};

// Names (as spelled in the report) with a defined mean CV <= cv_threshold.
std::set<std::string> stability_filter(const StabilityReport& report, const VerifierConfig& cfg);

// With require_adversarial_pass, names whose row passed; otherwise every row.
std::set<std::string> adversarial_filter(const DiscriminativeReport& report, const VerifierConfig& cfg);

// One verdict per candidate, in candidate order. disc may be null when no
// criterion survived the stability filter.
VerifiedCriteriaSet assemble_verdicts(const CriteriaSet& candidates, const StabilityReport& stability,
                                      const DiscriminativeReport* disc, const VerifierConfig& cfg);

nlohmann::ordered_json verified_to_json(const VerifiedCriteriaSet& v, const VerifierConfig& cfg);
std::string serialize_verified(const VerifiedCriteriaSet& v, const VerifierConfig& cfg);
VerifiedCriteriaSet parse_verified(std::string_view text);

nlohmann::ordered_json config_to_json(const VerifierConfig& cfg);

struct VerifyOutcome {
  VerifiedCriteriaSet verified;
  RunBundle run;
  std::optional<std::filesystem::path> manifest;  // set when persisted
};

// Runs the whole pipeline. With a non-empty out_dir the run (including its
// reports) is saved to {out_dir}/{run_id}.
VerifyOutcome verify(const TaskSpec& task, std::span<const TaskSample> corpus, const VerifierConfig& cfg,
                     const AgentContext& ctx, EmbeddingProvider& embedder, const std::filesystem::path& out_dir = {},
                     const std::string& run_id = "verify", bool overwrite = false);

}  // namespace agenteval
