#pragma once
// Criteria data model: a criterion is a named rubric dimension whose accepted
// values are ordered worst -> best; the ordinal score of a label is its index.

#include <string>
#include <string_view>
#include <vector>

#include "json.hpp"

namespace agenteval {

enum class Provenance { kTaskBased, kSolutionBased, kSummarized, kVerified };

std::string_view to_string(Provenance p);
Provenance provenance_from_string(std::string_view tag);  // throws FormatError

struct Criterion {
  std::string name;
  std::string description;
  std::vector<std::string> accepted_values;

  friend bool operator==(const Criterion&, const Criterion&) = default;
};

struct CriteriaSet {
  std::string task_name;
  Provenance provenance = Provenance::kTaskBased;
  std::vector<Criterion> criteria;

  const Criterion* find(std::string_view name) const;  // case-insensitive
  std::vector<std::string> names() const;

  friend bool operator==(const CriteriaSet&, const CriteriaSet&) = default;
};

// Throws FormatError describing the first violated rule.
void validate(const Criterion& c);
void validate(const CriteriaSet& cs);

// Index of label among accepted_values, comparing trimmed, case-folded text.
// Throws FormatError("unknown label ...") when absent.
int ordinal_score(const Criterion& c, std::string_view label);

// Non-throwing variant for reply parsing.
int find_label(const Criterion& c, std::string_view label);  // -1 when absent

CriteriaSet parse_criteria(std::string_view text);
std::string serialize_criteria(const CriteriaSet& cs);

// JSON element <-> Criterion, shared by the criteria file, critic replies and
// the verified document.
Criterion criterion_from_json(const nlohmann::json& j);
nlohmann::ordered_json criterion_to_json(const Criterion& c);
nlohmann::ordered_json criteria_to_json(const CriteriaSet& cs);
CriteriaSet criteria_from_json(const nlohmann::json& j);

}  // namespace agenteval
