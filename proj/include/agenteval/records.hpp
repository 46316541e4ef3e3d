#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

namespace agenteval {

// One (sample, criterion, seed) quantification. Invalid records carry no label
// and no score; raw_fragment keeps what the model said (or the failure).
struct QuantifiedRecord {
  std::string sample_id;
  std::string criterion;
  std::uint64_t seed = 0;
  std::string label;
  std::optional<int> score;
  bool valid = false;
  std::string raw_fragment;

  friend bool operator==(const QuantifiedRecord&, const QuantifiedRecord&) = default;
};

// Sort key used by every sweep: (sample_id, criterion, seed).
void sort_records(std::vector<QuantifiedRecord>& records);

std::string serialize_records(const std::vector<QuantifiedRecord>& records);
std::vector<QuantifiedRecord> parse_records(std::string_view jsonl);

double invalid_fraction(const std::vector<QuantifiedRecord>& records);

}  // namespace agenteval
