#include "agenteval/analytics.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

#include "agenteval/errors.hpp"
#include "agenteval/perturb.hpp"
#include "agenteval/util.hpp"

namespace agenteval {

namespace {

constexpr double kZ95 = 1.96;

// criterion (as spelled in cs) -> sample -> valid scores
using ScoreTable = std::map<std::string, std::map<std::string, std::vector<double>>>;

ScoreTable valid_scores(std::span<const QuantifiedRecord> records, const CriteriaSet& cs,
                        std::uint64_t max_seed = UINT64_MAX) {
  ScoreTable table;
  for (const auto& c : cs.criteria) table[c.name];
  for (const auto& r : records) {
    if (r.seed > max_seed) continue;
    const Criterion* c = cs.find(r.criterion);
    if (c == nullptr) continue;
    auto& per_sample = table[c->name][r.sample_id];
    if (r.valid && r.score) per_sample.push_back(*r.score);
  }
  for (auto& [criterion, per_sample] : table) {
    for (auto& [sample, scores] : per_sample) std::sort(scores.begin(), scores.end());
  }
  return table;
}

CvValue mean_cv_of(const std::map<std::string, std::vector<double>>& per_sample, std::vector<SampleCv>* detail,
                   std::size_t* used) {
  double sum = 0.0;
  std::size_t n = 0;
  for (const auto& [sample, scores] : per_sample) {
    CvValue cv;
    if (scores.size() >= 2) cv = coefficient_of_variation(scores);
    if (detail != nullptr) detail->push_back({sample, cv});
    if (cv) {
      sum += *cv;
      ++n;
    }
  }
  if (used != nullptr) *used = n;
  if (n == 0) return std::nullopt;
  return sum / static_cast<double>(n);
}

std::map<std::string, double> sample_means(const std::map<std::string, std::vector<double>>& per_sample) {
  std::map<std::string, double> out;
  for (const auto& [sample, scores] : per_sample) {
    if (!scores.empty()) out[sample] = mean_of(scores);
  }
  return out;
}

std::optional<double> mean_of_values(const std::map<std::string, double>& m) {
  if (m.empty()) return std::nullopt;
  double sum = 0.0;
  for (const auto& [k, v] : m) sum += v;
  return sum / static_cast<double>(m.size());
}

}  // namespace

double mean_of(std::span<const double> xs) {
  if (xs.empty()) throw PreconditionError("mean of an empty list");
  double sum = 0.0;
  for (double x : xs) sum += x;
  return sum / static_cast<double>(xs.size());
}

double sample_stddev(std::span<const double> xs) {
  if (xs.size() < 2) return 0.0;
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  return std::sqrt(ss / static_cast<double>(xs.size() - 1));
}

CvValue coefficient_of_variation(std::span<const double> xs) {
  if (xs.size() < 2) throw PreconditionError("coefficient of variation needs at least 2 values");
  const double m = mean_of(xs);
  double ss = 0.0;
  for (double x : xs) ss += (x - m) * (x - m);
  const double sigma = std::sqrt(ss / static_cast<double>(xs.size()));
  if (sigma == 0.0) return 0.0;
  if (m == 0.0) return std::nullopt;
  return sigma / m;
}

double ci95_half_width(std::span<const double> xs, const CiOptions& opts) {
  if (xs.size() < 2) return 0.0;
  if (opts.method == CiMethod::kNormal) {
    return kZ95 * sample_stddev(xs) / std::sqrt(static_cast<double>(xs.size()));
  }
  SplitMix64 rng(opts.seed);
  const int b = std::max(opts.bootstrap_resamples, 2);
  std::vector<double> means(static_cast<std::size_t>(b));
  for (auto& mean : means) {
    double sum = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) sum += xs[rng.below(xs.size())];
    mean = sum / static_cast<double>(xs.size());
  }
  std::sort(means.begin(), means.end());
  const auto at = [&](double q) {
    const double pos = q * static_cast<double>(means.size() - 1);
    const auto lo = static_cast<std::size_t>(std::floor(pos));
    const auto hi = std::min(lo + 1, means.size() - 1);
    return means[lo] + (means[hi] - means[lo]) * (pos - static_cast<double>(lo));
  };
  return (at(0.975) - at(0.025)) / 2.0;
}

const CriterionStability* StabilityReport::find(std::string_view criterion) const {
  const std::string key = fold(criterion);
  for (const auto& c : criteria) {
    if (fold(c.criterion) == key) return &c;
  }
  return nullptr;
}

StabilityReport stability_report(std::span<const QuantifiedRecord> records, const CriteriaSet& cs) {
  std::set<std::uint64_t> seeds;
  for (const auto& r : records) seeds.insert(r.seed);
  if (seeds.size() < 2) throw PreconditionError("stability report needs at least 2 seeds");

  StabilityReport report;
  report.seeds = static_cast<int>(seeds.size());
  std::map<std::string, std::pair<std::size_t, std::size_t>> counts;  // invalid, total
  std::size_t invalid = 0;
  std::size_t total = 0;
  for (const auto& r : records) {
    const Criterion* c = cs.find(r.criterion);
    if (c == nullptr) continue;
    auto& [bad, all] = counts[c->name];
    ++all;
    ++total;
    if (!r.valid) {
      ++bad;
      ++invalid;
    }
  }
  report.invalid_rate = total == 0 ? 0.0 : static_cast<double>(invalid) / static_cast<double>(total);

  const ScoreTable table = valid_scores(records, cs);
  for (const auto& c : cs.criteria) {
    CriterionStability cst;
    cst.criterion = c.name;
    cst.mean_cv = mean_cv_of(table.at(c.name), &cst.per_sample, &cst.samples_used);
    const auto& [bad, all] = counts[c.name];
    cst.invalid_rate = all == 0 ? 0.0 : static_cast<double>(bad) / static_cast<double>(all);
    report.criteria.push_back(std::move(cst));
  }
  return report;
}

ConvergenceCurve convergence_curve(std::span<const QuantifiedRecord> records, const CriteriaSet& cs, int max_seeds) {
  if (max_seeds < 2) throw PreconditionError("convergence curve needs max_seeds >= 2");
  std::set<std::uint64_t> seeds;
  for (const auto& r : records) seeds.insert(r.seed);
  for (int s = 1; s <= max_seeds; ++s) {
    if (!seeds.contains(static_cast<std::uint64_t>(s))) {
      throw PreconditionError("records do not cover seed " + std::to_string(s));
    }
  }

  std::map<std::string, CvValue> previous;
  for (const auto& c : cs.criteria) previous[c.name] = 0.0;

  ConvergenceCurve curve;
  for (int n = 2; n <= max_seeds; ++n) {
    const ScoreTable table = valid_scores(records, cs, static_cast<std::uint64_t>(n));
    double delta = 0.0;
    for (const auto& c : cs.criteria) {
      const CvValue now = mean_cv_of(table.at(c.name), nullptr, nullptr);
      const CvValue& before = previous[c.name];
      if (now && before) delta += std::abs(*now - *before);
      previous[c.name] = now;
    }
    curve.points.push_back({n, delta});
  }
  return curve;
}

DiversityCurve diversity_curve(std::span<const CriteriaSet> runs, const DedupConfig& cfg, EmbeddingProvider& provider,
                               int resamples, std::uint64_t seed) {
  check_dedup_config(cfg);
  if (runs.empty()) throw PreconditionError("diversity curve needs at least one run");
  if (resamples < 1) throw PreconditionError("diversity curve needs resamples >= 1");

  std::vector<Criterion> universe;
  for (const auto& cs : runs) universe.insert(universe.end(), cs.criteria.begin(), cs.criteria.end());
  const DescriptionSimilarity sim(universe, provider);

  SplitMix64 rng(seed);
  DiversityCurve curve;
  const std::size_t n = runs.size();
  for (std::size_t m = 1; m <= n; ++m) {
    std::vector<double> counts;
    counts.reserve(static_cast<std::size_t>(resamples));
    for (int r = 0; r < resamples; ++r) {
      auto order = seeded_permutation(n, rng);
      order.resize(m);
      std::sort(order.begin(), order.end());
      std::vector<Criterion> pooled;
      for (std::size_t idx : order) pooled.insert(pooled.end(), runs[idx].criteria.begin(), runs[idx].criteria.end());
      counts.push_back(static_cast<double>(cluster_criteria(pooled, cfg.tau, sim).representatives.size()));
    }
    curve.points.push_back({static_cast<int>(m), mean_of(counts),
                            kZ95 * sample_stddev(counts) / std::sqrt(static_cast<double>(resamples))});
  }
  return curve;
}

GroupComparison group_comparison(std::span<const QuantifiedRecord> records, std::span<const TaskSample> samples,
                                 const CriteriaSet& cs, const CiOptions& opts) {
  std::map<std::string, bool> flag;
  for (const auto& s : samples) {
    if (!s.is_successful) throw PreconditionError("sample " + s.id + " has no is_successful flag");
    flag[s.id] = *s.is_successful;
  }
  const ScoreTable table = valid_scores(records, cs);
  GroupComparison out;
  for (const auto& c : cs.criteria) {
    std::vector<double> succeeded;
    std::vector<double> failed;
    for (const auto& [sample, mean] : sample_means(table.at(c.name))) {
      auto it = flag.find(sample);
      if (it == flag.end()) continue;
      (it->second ? succeeded : failed).push_back(mean);
    }
    GroupRow row;
    row.criterion = c.name;
    const auto cell = [&](const std::vector<double>& xs) -> std::optional<GroupCell> {
      if (xs.empty()) return std::nullopt;
      return GroupCell{mean_of(xs), ci95_half_width(xs, opts), xs.size()};
    };
    row.success = cell(succeeded);
    row.fail = cell(failed);
    out.rows.push_back(std::move(row));
  }
  return out;
}

const DiscriminativeRow* DiscriminativeReport::find(std::string_view criterion) const {
  const std::string key = fold(criterion);
  for (const auto& r : rows) {
    if (fold(r.criterion) == key) return &r;
  }
  return nullptr;
}

DiscriminativeReport discriminative_power(std::span<const QuantifiedRecord> orig_records,
                                          std::span<const QuantifiedRecord> dist_records, const CriteriaSet& cs) {
  std::set<std::string> originals;
  for (const auto& r : orig_records) originals.insert(r.sample_id);
  std::vector<QuantifiedRecord> renamed(dist_records.begin(), dist_records.end());
  for (auto& r : renamed) {
    const std::string_view id = r.sample_id;
    const bool suffixed =
        id.size() > kDisturbedSuffix.size() && id.substr(id.size() - kDisturbedSuffix.size()) == kDisturbedSuffix;
    const std::string original = suffixed ? std::string(id.substr(0, id.size() - kDisturbedSuffix.size())) : "";
    if (!suffixed || !originals.contains(original)) {
      throw PreconditionError("disturbed sample " + r.sample_id + " has no original counterpart");
    }
    r.sample_id = original;
  }

  const ScoreTable orig = valid_scores(orig_records, cs);
  const ScoreTable dist = valid_scores(renamed, cs);
  DiscriminativeReport report;
  for (const auto& c : cs.criteria) {
    const auto om = sample_means(orig.at(c.name));
    const auto dm = sample_means(dist.at(c.name));
    DiscriminativeRow row;
    row.criterion = c.name;
    row.mean_original = mean_of_values(om);
    row.mean_disturbed = mean_of_values(dm);
    row.passed = row.mean_original && row.mean_disturbed && *row.mean_original > *row.mean_disturbed;
    std::size_t wins = 0;
    for (const auto& [sample, d] : dm) {
      auto it = om.find(sample);
      if (it == om.end()) continue;
      ++row.paired;
      if (it->second > d) ++wins;
    }
    row.win_fraction = row.paired == 0 ? 0.0 : static_cast<double>(wins) / static_cast<double>(row.paired);
    report.rows.push_back(std::move(row));
  }
  return report;
}

namespace {

nlohmann::ordered_json opt(const std::optional<double>& v) {
  if (!v || !std::isfinite(*v)) return nullptr;
  return *v;
}

}  // namespace

nlohmann::ordered_json to_json(const StabilityReport& r) {
  nlohmann::ordered_json j;
  j["seeds"] = r.seeds;
  j["invalid_rate"] = r.invalid_rate;
  j["criteria"] = nlohmann::ordered_json::array();
  for (const auto& c : r.criteria) {
    nlohmann::ordered_json cj;
    cj["criterion"] = c.criterion;
    cj["mean_cv"] = c.mean_cv ? nlohmann::ordered_json(*c.mean_cv) : nlohmann::ordered_json("UNSTABLE");
    cj["samples_used"] = c.samples_used;
    cj["invalid_rate"] = c.invalid_rate;
    cj["per_sample"] = nlohmann::ordered_json::array();
    for (const auto& s : c.per_sample) cj["per_sample"].push_back({{"sample_id", s.sample_id}, {"cv", opt(s.cv)}});
    j["criteria"].push_back(std::move(cj));
  }
  return j;
}

nlohmann::ordered_json to_json(const ConvergenceCurve& c) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& p : c.points) j.push_back({{"n_seeds", p.n_seeds}, {"delta", p.delta}});
  return j;
}

nlohmann::ordered_json to_json(const DiversityCurve& c) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& p : c.points) j.push_back({{"m", p.m}, {"mean_unique", p.mean_unique}, {"ci95", p.ci95}});
  return j;
}

nlohmann::ordered_json to_json(const GroupComparison& g) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  const auto cell = [](const std::optional<GroupCell>& c) -> nlohmann::ordered_json {
    if (!c) return nullptr;
    return {{"mean", c->mean}, {"ci95", c->ci95}, {"count", c->count}};
  };
  for (const auto& row : g.rows) {
    j.push_back({{"criterion", row.criterion}, {"success", cell(row.success)}, {"fail", cell(row.fail)}});
  }
  return j;
}

nlohmann::ordered_json to_json(const DiscriminativeReport& r) {
  nlohmann::ordered_json j = nlohmann::ordered_json::array();
  for (const auto& row : r.rows) {
    j.push_back({{"criterion", row.criterion},
                 {"mean_original", opt(row.mean_original)},
                 {"mean_disturbed", opt(row.mean_disturbed)},
                 {"passed", row.passed},
                 {"win_fraction", row.win_fraction},
                 {"paired", row.paired}});
  }
  return j;
}

}  // namespace agenteval
