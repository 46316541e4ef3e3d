#pragma once
// Synthetic record sets and critic runs with known statistics.

#include <functional>
#include <optional>
#include <string>
#include <vector>

#include "agenteval/criteria.hpp"
#include "agenteval/records.hpp"
#include "agenteval/util.hpp"

namespace agenteval::testing {

inline std::string sample_name(std::size_t i) {
  std::string n = std::to_string(i);
  return "s" + std::string(n.size() < 3 ? 3 - n.size() : 0, '0') + n;
}

inline CriteriaSet named_criteria(const std::vector<std::string>& names, std::size_t levels = 3) {
  CriteriaSet cs;
  cs.task_name = "synthetic";
  for (const auto& n : names) {
    Criterion c{n, "Synthetic criterion " + n + ".", {}};
    for (std::size_t k = 0; k < levels; ++k) c.accepted_values.push_back("L" + std::to_string(k));
    cs.criteria.push_back(std::move(c));
  }
  return cs;
}

// score(sample index, criterion index, seed) -> score, or nullopt for an
// invalid record. Seeds run 1..seeds.
using ScoreFn = std::function<std::optional<int>(std::size_t, std::size_t, std::uint64_t)>;

inline std::vector<QuantifiedRecord> make_records(std::size_t samples, const CriteriaSet& cs, int seeds,
                                                  const ScoreFn& score, const std::string& suffix = "") {
  std::vector<QuantifiedRecord> out;
  for (std::size_t s = 0; s < samples; ++s) {
    for (std::size_t c = 0; c < cs.criteria.size(); ++c) {
      for (int seed = 1; seed <= seeds; ++seed) {
        QuantifiedRecord r;
        r.sample_id = sample_name(s) + suffix;
        r.criterion = cs.criteria[c].name;
        r.seed = static_cast<std::uint64_t>(seed);
        if (auto v = score(s, c, r.seed)) {
          r.valid = true;
          r.score = *v;
          r.label = cs.criteria[c].accepted_values.at(static_cast<std::size_t>(*v));
        } else {
          r.raw_fragment = "no usable label";
        }
        out.push_back(std::move(r));
      }
    }
  }
  sort_records(out);
  return out;
}

// Four criteria, twenty samples, eighteen seeds. Seeds 1..10 carry hashed
// noise in 0..2; from seed 11 on the quantifier returns nothing usable, so
// the per-sample score lists stop changing.
inline std::vector<QuantifiedRecord> settling_records(const CriteriaSet& cs) {
  return make_records(20, cs, 18, [](std::size_t s, std::size_t c, std::uint64_t seed) -> std::optional<int> {
    if (seed > 10) return std::nullopt;
    SplitMix64 rng((s * 131 + c) * 1009 + seed);
    return static_cast<int>(rng.below(3));
  });
}

// Critic runs over a vocabulary of concepts with mutually dissimilar
// descriptions; each run names its concepts slightly differently, so only
// description similarity can merge them.
struct SyntheticRuns {
  std::vector<CriteriaSet> runs;
  std::size_t distinct_concepts = 0;
};

inline SyntheticRuns synthetic_critic_runs(std::size_t n, std::uint64_t seed) {
  static const std::vector<std::pair<std::string, std::string>> vocab = {
      {"Clarity", "Readers follow every step without rereading."},
      {"Correctness", "Final numeric answer matches ground truth."},
      {"Efficiency", "Minimal computation; avoids brute force."},
      {"Notation", "Symbols like x_i, sigma, and units stay consistent."},
      {"Verification", "Checks result by substitution back into equations."},
      {"Completeness", "Addresses all sub-questions posed."},
      {"Conciseness", "Short; no padding or repetition."},
      {"Error Handling", "Spots own mistakes mid-way & repairs them."},
      {"Code Quality", "Python code runs cleanly, well named variables."},
      {"Tool Use", "Invokes calculators/interpreters when helpful."},
      {"Structure", "Organized into numbered phases with headings."},
      {"Rigor", "Proves each claim; cites theorems formally."},
      {"Creativity", "Unexpected, elegant trick or insight."},
      {"Instruction Following", "Obeys requested output format (boxed answer)."},
      {"Generality", "Method transfers to similar puzzles."},
      {"Visual Aids", "Includes tables, diagrams or sketches."},
  };
  SplitMix64 rng(seed);
  SyntheticRuns out;
  std::vector<bool> used(vocab.size(), false);
  for (std::size_t r = 0; r < n; ++r) {
    CriteriaSet cs;
    cs.task_name = "synthetic";
    cs.provenance = Provenance::kTaskBased;
    // skewed draw: low indices are common, high ones rare
    const std::size_t k = 2 + rng.below(4);
    std::vector<std::size_t> picked;
    while (picked.size() < k) {
      const std::size_t a = rng.below(vocab.size());
      const std::size_t b = rng.below(vocab.size());
      const std::size_t idx = std::min(a, b);
      bool dup = false;
      for (auto p : picked) dup |= p == idx;
      if (!dup) picked.push_back(idx);
    }
    for (auto idx : picked) {
      used[idx] = true;
      const std::string name = vocab[idx].first + (rng.below(2) ? "" : " Level");
      cs.criteria.push_back({name, vocab[idx].second, {"Low", "Medium", "High"}});
    }
    out.runs.push_back(std::move(cs));
  }
  for (bool u : used) out.distinct_concepts += u ? 1 : 0;
  return out;
}

}  // namespace agenteval::testing
