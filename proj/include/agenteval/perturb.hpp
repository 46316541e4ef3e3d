#pragma once
// Adversarial disturbance: drop a fraction of the sentence units of the
// assistant messages so a discriminating criterion should score lower.
//
// Units: a fenced code block (``` ... ```) is one unit; otherwise a unit runs
// until a run of '.', '!' or '?' followed by whitespace or end of text, a blank
// line, the start of a fence, or end of text.
//
// Removal indices come from SplitMix64 ("splitmix64-v1") seeded with
// seed XOR fnv1a64(sample id), then a Fisher-Yates shuffle of the unit pool;
// the first k positions are removed.

#include <cstdint>
#include <span>
#include <string>
#include <string_view>
#include <vector>

#include "agenteval/samples.hpp"

namespace agenteval {

inline constexpr std::string_view kDisturbedSuffix = "#disturbed";
inline constexpr std::string_view kDisturbGenerator = "splitmix64-v1+fisher-yates";

struct DisturbConfig {
  double fraction = 0.25;
  std::uint64_t seed = 0;
};

// separators.size() == units.size() + 1 and
// separators[0] + units[0] + separators[1] + ... + units[n-1] + separators[n]
// reproduces the input exactly.
struct TextSegments {
  std::vector<std::string> units;
  std::vector<std::string> separators;

  std::string join() const;
};

TextSegments segment_text(std::string_view text);
std::vector<std::string> split_units(std::string_view text);

struct UnitRef {
  std::size_t message = 0;
  std::size_t unit = 0;

  friend auto operator<=>(const UnitRef&, const UnitRef&) = default;
};

struct DisturbedSample {
  std::string original_id;
  TaskSample sample;
  std::vector<UnitRef> removed_units;  // ascending
};

// round-half-up(fraction * n) clamped to [1, n-1]; 0 when fraction == 0 or n < 2.
std::size_t removal_count(double fraction, std::size_t n);

DisturbedSample disturb_sample(const TaskSample& s, const DisturbConfig& cfg);
std::vector<TaskSample> disturb_corpus(std::span<const TaskSample> corpus, const DisturbConfig& cfg);

// "m:u,m:u,..." as stored in meta["removed_units"].
std::string encode_unit_refs(std::span<const UnitRef> refs);

}  // namespace agenteval
