#include "agenteval/criteria.hpp"

#include <set>

#include "agenteval/errors.hpp"
#include "agenteval/util.hpp"

namespace agenteval {

namespace {

const nlohmann::json& require(const nlohmann::json& obj, const char* key, const char* where) {
  auto it = obj.find(key);
  if (it == obj.end()) throw FormatError(std::string(where) + ": missing \"" + key + "\"");
  return *it;
}

std::string require_string(const nlohmann::json& obj, const char* key, const char* where) {
  const auto& v = require(obj, key, where);
  if (!v.is_string()) throw FormatError(std::string(where) + ": \"" + key + "\" must be a string");
  return v.get<std::string>();
}

}  // namespace

std::string_view to_string(Provenance p) {
  switch (p) {
    case Provenance::kTaskBased:
      return "task_based";
    case Provenance::kSolutionBased:
      return "solution_based";
    case Provenance::kSummarized:
      return "summarized";
    case Provenance::kVerified:
      return "verified";
  }
  return "task_based";
}

Provenance provenance_from_string(std::string_view tag) {
  if (tag == "task_based") return Provenance::kTaskBased;
  if (tag == "solution_based") return Provenance::kSolutionBased;
  if (tag == "summarized") return Provenance::kSummarized;
  if (tag == "verified") return Provenance::kVerified;
  throw FormatError("unknown provenance tag \"" + std::string(tag) + "\"");
}

const Criterion* CriteriaSet::find(std::string_view name) const {
  const std::string key = fold(name);
  for (const auto& c : criteria) {
    if (fold(c.name) == key) return &c;
  }
  return nullptr;
}

std::vector<std::string> CriteriaSet::names() const {
  std::vector<std::string> out;
  out.reserve(criteria.size());
  for (const auto& c : criteria) out.push_back(c.name);
  return out;
}

void validate(const Criterion& c) {
  if (trim(c.name).empty()) throw FormatError("criterion name must be non-empty");
  if (trim(c.description).empty()) {
    throw FormatError("criterion \"" + c.name + "\": description must be non-empty");
  }
  if (c.accepted_values.empty()) {
    throw FormatError("criterion \"" + c.name + "\": accepted_values is empty");
  }
  if (c.accepted_values.size() < 2) {
    throw FormatError("criterion \"" + c.name + "\": needs at least 2 accepted values");
  }
  std::set<std::string> seen;
  for (const auto& v : c.accepted_values) {
    const std::string key = fold(v);
    if (key.empty()) throw FormatError("criterion \"" + c.name + "\": blank accepted value");
    if (!seen.insert(key).second) {
      throw FormatError("criterion \"" + c.name + "\": duplicate accepted value \"" + v + "\"");
    }
  }
}

void validate(const CriteriaSet& cs) {
  std::set<std::string> seen;
  for (const auto& c : cs.criteria) {
    validate(c);
    if (!seen.insert(fold(c.name)).second) {
      throw FormatError("duplicate criterion name \"" + c.name + "\"");
    }
  }
}

int find_label(const Criterion& c, std::string_view label) {
  const std::string key = fold(label);
  for (std::size_t i = 0; i < c.accepted_values.size(); ++i) {
    if (fold(c.accepted_values[i]) == key) return static_cast<int>(i);
  }
  return -1;
}

int ordinal_score(const Criterion& c, std::string_view label) {
  const int idx = find_label(c, label);
  if (idx < 0) {
    throw FormatError("unknown label \"" + std::string(label) + "\" for criterion \"" + c.name + "\"");
  }
  return idx;
}

Criterion criterion_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("criterion must be a JSON object");
  Criterion c;
  c.name = require_string(j, "name", "criterion");
  c.description = require_string(j, "description", "criterion");
  const auto& values = require(j, "accepted_values", "criterion");
  if (!values.is_array()) throw FormatError("criterion: \"accepted_values\" must be an array");
  for (const auto& v : values) {
    if (!v.is_string()) throw FormatError("criterion: accepted values must be strings");
    c.accepted_values.push_back(v.get<std::string>());
  }
  return c;
}

nlohmann::ordered_json criterion_to_json(const Criterion& c) {
  nlohmann::ordered_json j;
  j["name"] = c.name;
  j["description"] = c.description;
  j["accepted_values"] = c.accepted_values;
  return j;
}

nlohmann::ordered_json criteria_to_json(const CriteriaSet& cs) {
  nlohmann::ordered_json j;
  j["task_name"] = cs.task_name;
  j["provenance"] = std::string(to_string(cs.provenance));
  j["criteria"] = nlohmann::ordered_json::array();
  for (const auto& c : cs.criteria) j["criteria"].push_back(criterion_to_json(c));
  return j;
}

CriteriaSet criteria_from_json(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("criteria document must be a JSON object");
  CriteriaSet cs;
  if (auto it = j.find("task_name"); it != j.end()) {
    if (!it->is_string()) throw FormatError("\"task_name\" must be a string");
    cs.task_name = it->get<std::string>();
  }
  if (auto it = j.find("provenance"); it != j.end()) {
    if (!it->is_string()) throw FormatError("\"provenance\" must be a string");
    cs.provenance = provenance_from_string(it->get<std::string>());
  }
  const auto& list = require(j, "criteria", "criteria document");
  if (!list.is_array()) throw FormatError("\"criteria\" must be an array");
  for (const auto& item : list) cs.criteria.push_back(criterion_from_json(item));
  validate(cs);
  return cs;
}

CriteriaSet parse_criteria(std::string_view text) {
  const auto j = nlohmann::json::parse(text.begin(), text.end(), nullptr, false);
  if (j.is_discarded()) throw FormatError("criteria document is not valid JSON");
  return criteria_from_json(j);
}

std::string serialize_criteria(const CriteriaSet& cs) { return criteria_to_json(cs).dump(2) + "\n"; }

}  // namespace agenteval
