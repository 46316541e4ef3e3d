#include "agenteval/records.hpp"

#include <algorithm>
#include <tuple>

#include "agenteval/errors.hpp"
#include "agenteval/util.hpp"
#include "json.hpp"

namespace agenteval {

void sort_records(std::vector<QuantifiedRecord>& records) {
  std::sort(records.begin(), records.end(), [](const auto& a, const auto& b) {
    return std::tie(a.sample_id, a.criterion, a.seed) < std::tie(b.sample_id, b.criterion, b.seed);
  });
}

std::string serialize_records(const std::vector<QuantifiedRecord>& records) {
  std::string out;
  for (const auto& r : records) {
    nlohmann::ordered_json j;
    j["sample_id"] = r.sample_id;
    j["criterion"] = r.criterion;
    j["seed"] = r.seed;
    j["label"] = r.label;
    if (r.score) {
      j["score"] = *r.score;
    } else {
      j["score"] = nullptr;
    }
    j["valid"] = r.valid;
    j["raw_fragment"] = r.raw_fragment;
    out += j.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    out += '\n';
  }
  return out;
}

std::vector<QuantifiedRecord> parse_records(std::string_view jsonl) {
  std::vector<QuantifiedRecord> out;
  std::size_t line_no = 0;
  std::size_t pos = 0;
  while (pos < jsonl.size()) {
    std::size_t end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    const std::string_view line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    const auto j = nlohmann::json::parse(line.begin(), line.end(), nullptr, false);
    const std::string where = "quantified line " + std::to_string(line_no);
    if (j.is_discarded() || !j.is_object()) throw FormatError(where + ": malformed JSON");
    try {
      QuantifiedRecord r;
      r.sample_id = j.at("sample_id").get<std::string>();
      r.criterion = j.at("criterion").get<std::string>();
      r.seed = j.at("seed").get<std::uint64_t>();
      r.label = j.value("label", std::string{});
      if (j.contains("score") && !j["score"].is_null()) r.score = j["score"].get<int>();
      r.valid = j.at("valid").get<bool>();
      r.raw_fragment = j.value("raw_fragment", std::string{});
      if (r.valid != r.score.has_value()) throw FormatError("score must be present iff valid");
      out.push_back(std::move(r));
    } catch (const nlohmann::json::exception& e) {
      throw FormatError(where + ": " + e.what());
    } catch (const FormatError& e) {
      throw FormatError(where + ": " + e.what());
    }
  }
  return out;
}

double invalid_fraction(const std::vector<QuantifiedRecord>& records) {
  if (records.empty()) return 0.0;
  const auto bad = std::count_if(records.begin(), records.end(), [](const auto& r) { return !r.valid; });
  return static_cast<double>(bad) / static_cast<double>(records.size());
}

}  // namespace agenteval
