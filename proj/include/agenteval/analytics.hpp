#pragma once
// Statistics over quantified records. All functions are pure and independent
// of record order.
//
// Conventions: coefficient of variation uses the population (divide-by-n)
// standard deviation; 95% intervals are normal approximations 1.96 * s / sqrt(k)
// with the sample (k - 1) standard deviation, or a percentile bootstrap; group
// and discriminative means average each sample over its seeds first.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

#include "agenteval/criteria.hpp"
#include "agenteval/dedup.hpp"
#include "agenteval/gateway.hpp"
#include "agenteval/records.hpp"
#include "agenteval/samples.hpp"
#include "json.hpp"

namespace agenteval {

// std::nullopt is the UNSTABLE sentinel (zero mean with non-zero spread).
using CvValue = std::optional<double>;

// Requires at least two values (PreconditionError otherwise).
CvValue coefficient_of_variation(std::span<const double> xs);

double mean_of(std::span<const double> xs);
double sample_stddev(std::span<const double> xs);

enum class CiMethod { kNormal, kBootstrap };

struct CiOptions {
  CiMethod method = CiMethod::kNormal;
  int bootstrap_resamples = 1000;
  std::uint64_t seed = 0;
};

// Half-width of the 95% interval of the mean; 0 for fewer than two values.
double ci95_half_width(std::span<const double> xs, const CiOptions& opts = {});

struct SampleCv {
  std::string sample_id;
  CvValue cv;  // nullopt: UNSTABLE or fewer than two valid scores
};

struct CriterionStability {
  std::string criterion;
  CvValue mean_cv;  // nullopt: UNSTABLE (no defined per-sample CV)
  std::vector<SampleCv> per_sample;
  std::size_t samples_used = 0;  // samples with a defined CV
  double invalid_rate = 0.0;     // invalid records / records for this criterion
};

struct StabilityReport {
  int seeds = 0;  // distinct seeds represented
  double invalid_rate = 0.0;
  std::vector<CriterionStability> criteria;

  const CriterionStability* find(std::string_view criterion) const;
};

StabilityReport stability_report(std::span<const QuantifiedRecord> records, const CriteriaSet& cs);

struct ConvergencePoint {
  int n_seeds = 0;
  double delta = 0.0;
};

struct ConvergenceCurve {
  std::vector<ConvergencePoint> points;
};

// For n in 2..max_seeds: sum over criteria of |meanCV(seeds 1..n) -
// meanCV(seeds 1..n-1)|. The one-seed baseline counts as 0 (a single
// observation has no spread); criteria whose mean CV is undefined on either
// side contribute nothing.
ConvergenceCurve convergence_curve(std::span<const QuantifiedRecord> records, const CriteriaSet& cs, int max_seeds);

struct DiversityPoint {
  int m = 0;
  double mean_unique = 0.0;
  double ci95 = 0.0;
};

struct DiversityCurve {
  std::vector<DiversityPoint> points;
};

// For M = 1..N: R times pick M distinct runs (seeded), pool their criteria in
// run order, dedup at tau and count representatives.
DiversityCurve diversity_curve(std::span<const CriteriaSet> runs, const DedupConfig& cfg,
                               EmbeddingProvider& provider, int resamples = 50, std::uint64_t seed = 0);

struct GroupCell {
  double mean = 0.0;
  double ci95 = 0.0;
  std::size_t count = 0;
};

struct GroupRow {
  std::string criterion;
  std::optional<GroupCell> success;  // absent when the group is empty
  std::optional<GroupCell> fail;
};

struct GroupComparison {
  std::vector<GroupRow> rows;
};

// Every sample must carry is_successful.
GroupComparison group_comparison(std::span<const QuantifiedRecord> records, std::span<const TaskSample> samples,
                                 const CriteriaSet& cs, const CiOptions& opts = {});

struct DiscriminativeRow {
  std::string criterion;
  std::optional<double> mean_original;
  std::optional<double> mean_disturbed;
  bool passed = false;  // mean_original > mean_disturbed, strictly
  double win_fraction = 0.0;
  std::size_t paired = 0;
};

struct DiscriminativeReport {
  std::vector<DiscriminativeRow> rows;

  const DiscriminativeRow* find(std::string_view criterion) const;
};

// Disturbed sample ids are "<original>#disturbed" and must pair with an
// original present in orig_records.
DiscriminativeReport discriminative_power(std::span<const QuantifiedRecord> orig_records,
                                          std::span<const QuantifiedRecord> dist_records, const CriteriaSet& cs);

// JSON mirrors of the reports (non-finite and absent values become null).
nlohmann::ordered_json to_json(const StabilityReport& r);
nlohmann::ordered_json to_json(const ConvergenceCurve& c);
nlohmann::ordered_json to_json(const DiversityCurve& c);
nlohmann::ordered_json to_json(const GroupComparison& g);
nlohmann::ordered_json to_json(const DiscriminativeReport& r);

}  // namespace agenteval
