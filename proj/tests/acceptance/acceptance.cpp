// Acceptance suite: one PASS/FAIL line per criterion, non-zero exit on any
// failure. Everything runs offline against mock backends and fixtures.

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "agenteval/analytics.hpp"
#include "agenteval/criteria.hpp"
#include "agenteval/dedup.hpp"
#include "agenteval/perturb.hpp"
#include "agenteval/quantifier.hpp"
#include "agenteval/records.hpp"
#include "agenteval/run_store.hpp"
#include "agenteval/samples.hpp"
#include "agenteval/verifier.hpp"
#include "synthetic.hpp"
#include "test_support.hpp"

using namespace agenteval;
using namespace agenteval::testing;

namespace {

struct Outcome {
  bool pass = true;
  std::ostringstream why;

  void require(bool cond, const std::string& what) {
    if (!cond && pass) why << what;
    if (!cond) pass = false;
  }
};

struct Criterion_ {
  int number;
  std::string title;
  double limit_s;
  std::function<void(Outcome&)> body;
};

using LD = long double;

std::optional<LD> oracle_cv(const std::vector<int>& xs) {
  LD sum = 0;
  for (int x : xs) sum += x;
  const LD mean = sum / xs.size();
  LD ss = 0;
  for (int x : xs) ss += (x - mean) * (x - mean);
  const LD sigma = std::sqrt(ss / xs.size());
  if (sigma == 0) return LD(0);
  if (mean == 0) return std::nullopt;
  return sigma / mean;
}

// 1
void cv_oracle(Outcome& o) {
  SplitMix64 rng(20240601);
  int mismatches = 0;
  for (int t = 0; t < 1000; ++t) {
    std::vector<int> xs(2 + rng.below(17));
    for (auto& x : xs) x = static_cast<int>(rng.below(5));
    const std::vector<double> d(xs.begin(), xs.end());
    const auto got = coefficient_of_variation(d);
    const auto want = oracle_cv(xs);
    if (got.has_value() != want.has_value()) {
      ++mismatches;
    } else if (got && std::abs(static_cast<LD>(*got) - *want) >= 1e-9L) {
      ++mismatches;
    }
  }
  o.require(mismatches == 0, std::to_string(mismatches) + " of 1000 vectors disagree with the oracle");
  const auto ex = coefficient_of_variation(std::vector<double>{2, 2, 1, 2});
  o.require(ex && std::abs(*ex - 0.247436) <= 1e-6, "CV([2,2,1,2]) != 0.247436");
}

// 2: brute force in double. Exact equality needs a fixed summation order:
// samples by id, each sample's scores ascending, criteria in set order.
void convergence_machinery(Outcome& o) {
  const auto cs = named_criteria({"A", "B", "C", "D"});
  const auto recs = settling_records(cs);
  const auto curve = convergence_curve(recs, cs, 18);
  o.require(curve.points.size() == 17, "expected 17 curve points");

  auto mean_cv_upto = [&](const std::string& crit, std::uint64_t n) -> std::optional<double> {
    std::map<std::string, std::vector<double>> per;
    for (const auto& r : recs) {
      if (r.criterion != crit || r.seed > n) continue;
      auto& v = per[r.sample_id];
      if (r.valid) v.push_back(*r.score);
    }
    double sum = 0;
    std::size_t used = 0;
    for (auto& [id, xs] : per) {
      if (xs.size() < 2) continue;
      std::sort(xs.begin(), xs.end());
      double m = 0;
      for (double x : xs) m += x;
      m /= static_cast<double>(xs.size());
      double ss = 0;
      for (double x : xs) ss += (x - m) * (x - m);
      const double sigma = std::sqrt(ss / static_cast<double>(xs.size()));
      if (sigma == 0) {
        ++used;
        continue;
      }
      if (m == 0) continue;
      sum += sigma / m;
      ++used;
    }
    if (used == 0) return std::nullopt;
    return sum / static_cast<double>(used);
  };

  std::map<std::string, std::optional<double>> prev;
  for (const auto& c : cs.criteria) prev[c.name] = 0.0;
  double max_err = 0;
  for (int n = 2; n <= 18 && static_cast<std::size_t>(n - 2) < curve.points.size(); ++n) {
    double delta = 0;
    for (const auto& c : cs.criteria) {
      const auto now = mean_cv_upto(c.name, static_cast<std::uint64_t>(n));
      if (now && prev[c.name]) delta += std::abs(*now - *prev[c.name]);
      prev[c.name] = now;
    }
    const auto& p = curve.points[static_cast<std::size_t>(n - 2)];
    o.require(p.n_seeds == n, "curve point has wrong seed count");
    max_err = std::max(max_err, std::abs(p.delta - delta));
    if (n > 10) o.require(p.delta == 0.0, "delta nonzero at n=" + std::to_string(n));
  }
  o.require(max_err == 0.0, "delta differs from brute force by " + std::to_string(max_err));
  o.require(curve.points.front().delta > 0.0, "noisy prefix shows no movement");
}

// 3
void stability_filter_check(Outcome& o) {
  const auto cs = named_criteria({"Alternating", "Constant"});
  const auto recs = make_records(6, cs, 18, [](std::size_t, std::size_t c, std::uint64_t seed) {
    return std::optional<int>(c == 0 ? static_cast<int>(1 + seed % 2) : 2);
  });
  const auto rep = stability_report(recs, cs);
  const auto alt = rep.find("Alternating")->mean_cv;
  o.require(alt && *alt > 0.3, "alternating mean CV not above 0.3");
  o.require(rep.find("Constant")->mean_cv == std::optional<double>(0.0), "constant criterion CV is not 0");

  VerifierConfig strict;
  strict.cv_threshold = 0.3;
  VerifierConfig loose;
  loose.cv_threshold = 0.5;
  const auto at3 = stability_filter(rep, strict);
  const auto at5 = stability_filter(rep, loose);
  o.require(at3.count("Alternating") == 0, "alternating kept at 0.3");
  o.require(at5.count("Alternating") == 1, "alternating dropped at 0.5");
  for (double th : {1e-9, 0.3, 0.5, 2.0}) {
    VerifierConfig c;
    c.cv_threshold = th;
    o.require(stability_filter(rep, c).count("Constant") == 1, "constant dropped at " + std::to_string(th));
  }
}

// 4
CriteriaSet random_criteria(SplitMix64& rng) {
  static const std::vector<std::string> words = {"answer", "steps",  "clear", "error", "code",  "final",
                                                 "time",   "concise", "units", "check", "proof", "format"};
  CriteriaSet cs;
  const std::size_t n = 1 + rng.below(10);
  for (std::size_t i = 0; i < n; ++i) {
    std::string d;
    const std::size_t len = 2 + rng.below(8);
    for (std::size_t w = 0; w < len; ++w) d += (w ? " " : "") + words[rng.below(words.size())];
    cs.criteria.push_back({"crit " + std::to_string(i), d, {"Low", "High"}});
  }
  // some descriptions repeated verbatim
  if (n > 1 && rng.below(2) == 0) cs.criteria[n - 1].description = cs.criteria[rng.below(n - 1)].description;
  return cs;
}

void dedup_properties(Outcome& o) {
  LexicalEmbedding lex;
  SplitMix64 rng(44);
  int noop_fail = 0, identical_fail = 0;
  for (int t = 0; t < 200; ++t) {
    const CriteriaSet cs = random_criteria(rng);
    if (!(dedup_criteria(cs, {1.0}, lex).first == cs)) ++noop_fail;

    // the twin must end up in the same cluster as its source
    CriteriaSet twin = cs;
    const auto& source = cs.criteria[rng.below(cs.criteria.size())];
    twin.criteria.push_back({"twin", source.description, {"Low", "High"}});
    const double tau = 0.01 + 0.98 * rng.unit();
    const auto [merged, report] = dedup_criteria(twin, {tau}, lex);
    bool together = false;
    for (const auto& cl : report.clusters) {
      const auto has = [&](const std::string& n) {
        return std::find(cl.members.begin(), cl.members.end(), n) != cl.members.end();
      };
      together |= has("twin") && has(source.name);
    }
    if (!together || merged.criteria.size() >= twin.criteria.size()) ++identical_fail;
  }
  o.require(noop_fail == 0, std::to_string(noop_fail) + " inputs changed at tau=1");
  o.require(identical_fail == 0, std::to_string(identical_fail) + " identical-description pairs survived tau<1");

  const CriteriaSet fx = parse_criteria(read_file(fixture("dedup/near_duplicates_30.json")));
  o.require(fx.criteria.size() == 30, "dedup fixture is not 30 criteria");
  std::size_t prev = 0;
  std::ostringstream counts;
  for (double tau : {0.7, 0.85, 1.0}) {
    const std::size_t reps = dedup_criteria(fx, {tau}, lex).first.criteria.size();
    counts << " " << tau << "->" << reps;
    o.require(reps >= prev, "representative count decreased at tau " + std::to_string(tau));
    prev = reps;
  }
  o.require(prev == 30, "tau=1 changed the fixture");
  o.why << (o.pass ? "reps" + counts.str() : "");
}

// 5
void diversity_curve_check(Outcome& o) {
  LexicalEmbedding lex;
  const auto syn = synthetic_critic_runs(50, 2024);
  const auto curve = diversity_curve(syn.runs, {0.85}, lex, 50, 9);
  o.require(curve.points.size() == 50, "expected M = 1..50");
  if (curve.points.size() != 50) return;

  std::set<std::string> descriptions;
  for (const auto& r : syn.runs) {
    for (const auto& c : r.criteria) descriptions.insert(c.description);
  }
  o.require(descriptions.size() == syn.distinct_concepts, "synthetic pool bookkeeping is off");

  const auto& full = curve.points[49];
  o.require(full.m == 50, "last point is not M = 50");
  o.require(full.mean_unique == static_cast<double>(descriptions.size()),
            "mean_unique at M=50 is " + std::to_string(full.mean_unique) + ", pool has " +
                std::to_string(descriptions.size()));
  o.require(full.ci95 == 0.0, "ci95 at M=50 is not 0");
  const auto& m5 = curve.points[4];
  const auto& m45 = curve.points[44];
  o.require(m45.ci95 <= m5.ci95, "ci95 at M=45 exceeds M=5");
  std::ostringstream d;
  d << "pool " << descriptions.size() << ", ci95 M=5 " << format_fixed6(m5.ci95) << " M=45 " << format_fixed6(m45.ci95);
  if (o.pass) o.why << d.str();
}

// 6
void perturbation_check(Outcome& o) {
  const std::string original_text = read_file(fixture("math/samples.jsonl"));
  const auto corpus = parse_samples(original_text);
  o.require(corpus.size() == 6, "fixture is not six samples");
  const DisturbConfig cfg{0.25, 0};
  for (const auto& s : corpus) {
    std::size_t n = 0;
    for (const auto& m : s.messages) {
      if (m.role == "assistant") n += split_units(m.content).size();
    }
    std::size_t want = 0;
    if (n >= 2) want = std::min<std::size_t>(std::max<std::size_t>(static_cast<std::size_t>(std::llround(0.25 * n)), 1), n - 1);
    const auto d = disturb_sample(s, cfg);
    o.require(d.removed_units.size() == want, s.id + ": removed " + std::to_string(d.removed_units.size()) +
                                                  " of " + std::to_string(n) + ", expected " + std::to_string(want));
    const auto again = disturb_sample(s, cfg);
    o.require(d.sample == again.sample && d.removed_units == again.removed_units, s.id + ": not deterministic");
  }
  const auto a = serialize_samples(disturb_corpus(corpus, cfg));
  const auto b = serialize_samples(disturb_corpus(corpus, cfg));
  o.require(a == b, "corpus disturbance not deterministic");
  o.require(serialize_samples(corpus) == original_text, "originals changed");
  o.require(read_file(fixture("math/samples.jsonl")) == original_text, "fixture file changed");
}

// 7
void discriminative_check(Outcome& o) {
  const auto cs = named_criteria({"Completeness", "Clarity"});
  // per-sample Completeness: originals 2,2,2,1,2 (mean 1.8), disturbed 1,1,2,1,1 (mean 1.2)
  const std::vector<int> orig_c = {2, 2, 2, 1, 2};
  const std::vector<int> dist_c = {1, 1, 2, 1, 1};
  const std::vector<int> same = {1, 2, 0, 2, 1};
  const auto orig = make_records(5, cs, 18, [&](std::size_t s, std::size_t c, std::uint64_t) {
    return std::optional<int>(c == 0 ? orig_c[s] : same[s]);
  });
  const auto dist = make_records(
      5, cs, 18,
      [&](std::size_t s, std::size_t c, std::uint64_t) { return std::optional<int>(c == 0 ? dist_c[s] : same[s]); },
      std::string(kDisturbedSuffix));
  const auto rep = discriminative_power(orig, dist, cs);
  const auto* comp = rep.find("Completeness");
  const auto* clar = rep.find("Clarity");
  o.require(comp && comp->mean_original == std::optional<double>(1.8), "original mean is not 1.8");
  o.require(comp && comp->mean_disturbed == std::optional<double>(1.2), "disturbed mean is not 1.2");
  o.require(comp && comp->passed, "Completeness did not pass");
  o.require(clar && !clar->passed, "equal means passed");
  const auto kept = adversarial_filter(rep, VerifierConfig{});
  o.require(kept == std::set<std::string>{"Completeness"}, "filter kept the wrong set");

  const auto stab = stability_report(orig, cs);
  const auto verdicts = assemble_verdicts(cs, stab, &rep, VerifierConfig{});
  o.require(verdicts.final_set.names() == std::vector<std::string>{"Completeness"}, "final set is not {Completeness}");
  for (const auto& v : verdicts.verdicts) {
    if (v.criterion == "Clarity") o.require(v.kind == VerdictKind::kDroppedAdversarial, "Clarity not dropped_adversarial");
  }
}

// 8
void end_to_end(Outcome& o) {
  LexicalEmbedding lex;
  TempDir tmp;
  const auto task = math_task();
  const auto corpus = math_samples();
  auto once = [&](const std::string& dir) {
    const auto ctx = make_context(std::make_shared<ScriptedMockBackend>(fixture("e2e/scripted")));
    return verify(task, corpus, VerifierConfig{}, ctx, lex, tmp / dir, "verify");
  };
  const auto first = once("a");
  const auto second = once("b");
  const std::string va = read_file(tmp / "a/verify/verified.json");
  const std::string vb = read_file(tmp / "b/verify/verified.json");
  o.require(va == vb, "verified.json differs between runs");

  const auto names = first.verified.final_set.names();
  const std::set<std::string> final_set(names.begin(), names.end());
  o.require(final_set == std::set<std::string>{"Clarity", "Efficiency", "Completeness"},
            "final set is not {Clarity, Efficiency, Completeness}");
  bool dropped = false;
  for (const auto& v : first.verified.verdicts) {
    if (v.criterion == "Error Analysis") dropped = v.kind != VerdictKind::kKept;
  }
  o.require(dropped, "Error Analysis was not dropped");
  (void)second;
}

// 9
void blindness_and_totality(Outcome& o) {
  const auto task = math_task();
  std::vector<TaskSample> corpus = math_samples();
  bool any_flag = false;
  for (const auto& s : corpus) any_flag |= s.is_successful.has_value();
  o.require(any_flag, "fixture carries no success flags");

  const std::vector<CriteriaSet> rubrics = {table1(),
                                            parse_criteria(read_file(fixture("dedup/near_duplicates_30.json")))};
  for (const auto& cs : rubrics) {
    auto capture = std::make_shared<CapturingBackend>(std::make_shared<HashMockBackend>());
    const auto ctx = make_context(capture);
    QuantifyConfig qc;
    const auto recs = sweep_seeds(task, cs, corpus, qc, ctx);
    const std::size_t want = corpus.size() * cs.criteria.size() * 18;
    o.require(recs.size() == want, "sweep produced " + std::to_string(recs.size()) + " records, expected " +
                                       std::to_string(want));
    std::set<std::tuple<std::string, std::string, std::uint64_t>> keys;
    for (const auto& r : recs) keys.insert({r.sample_id, r.criterion, r.seed});
    o.require(keys.size() == want, "duplicate (sample, criterion, seed) records");
    for (const auto& req : capture->requests()) {
      for (const auto& m : req.messages) {
        if (m.content.find("successful") != std::string::npos || m.content.find("is_successful") != std::string::npos) {
          o.require(false, "a quantifier prompt mentions the success flag");
        }
      }
    }
  }
}

// 10
void round_trips(Outcome& o) {
  for (const char* rel : {"math/table1_criteria.json", "dedup/near_duplicates_30.json"}) {
    const std::string text = read_file(fixture(rel));
    o.require(serialize_criteria(parse_criteria(text)) == text, std::string(rel) + " does not round-trip");
  }
  const std::string samples = read_file(fixture("math/samples.jsonl"));
  o.require(serialize_samples(parse_samples(samples)) == samples, "samples.jsonl does not round-trip");
  // and a generated corpus of records stays stable too
  const auto cs = named_criteria({"A", "B"});
  const auto recs = settling_records(cs);
  const std::string rtext = serialize_records(recs);
  o.require(serialize_records(parse_records(rtext)) == rtext, "records do not round-trip");
}

}  // namespace

int main() {
  const std::vector<Criterion_> criteria = {
      {1, "CV oracle", 1.0, cv_oracle},
      {2, "convergence machinery", 5.0, convergence_machinery},
      {3, "stability filter", 5.0, stability_filter_check},
      {4, "dedup properties", 2.0, dedup_properties},
      {5, "diversity curve", 10.0, diversity_curve_check},
      {6, "perturbation", 1.0, perturbation_check},
      {7, "discriminative filter", 5.0, discriminative_check},
      {8, "end-to-end verify", 60.0, end_to_end},
      {9, "blindness and totality", 60.0, blindness_and_totality},
      {10, "format round-trips", 60.0, round_trips},
  };
  int failures = 0;
  for (const auto& c : criteria) {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    try {
      c.body(o);
    } catch (const std::exception& e) {
      o.pass = false;
      o.why << "exception: " << e.what();
    }
    const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
    if (secs >= c.limit_s) {
      if (o.pass) o.why.str("");
      o.pass = false;
      o.why << " over time limit " << c.limit_s << " s";
    }
    failures += o.pass ? 0 : 1;
    std::printf("%s  %2d %-24s %7.3f s  %s\n", o.pass ? "PASS" : "FAIL", c.number, c.title.c_str(), secs,
                o.why.str().c_str());
  }
  std::printf("%d/%zu criteria passed\n", static_cast<int>(criteria.size()) - failures, criteria.size());
  return failures == 0 ? 0 : 1;
}
