#pragma once
// Scores samples against criteria. The quantifier prompt carries the task
// description, the criteria and the transcript; it never carries the
// sample's success flag or meta fields.

#include <cstddef>
#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

#include "agenteval/context.hpp"
#include "agenteval/criteria.hpp"
#include "agenteval/records.hpp"
#include "agenteval/samples.hpp"

namespace agenteval {

struct QuantifyConfig {
  int seeds = 18;
  std::size_t bucket_size = 0;  // criteria per prompt; 0 = all at once
};

// criterion name -> label, both spelled as in cs. Only pairs whose key names
// a criterion and whose value is one of its accepted values are returned;
// never throws.
std::map<std::string, std::string> parse_quantifier_reply(std::string_view reply, const CriteriaSet& cs);

ChatRequest build_quantifier_request(const TaskSpec& task, std::span<const Criterion> bucket,
                                     const TaskSample& sample, std::uint64_t seed, const AgentContext& ctx);

// Exactly one record per criterion, in criteria order. Backend failures give
// invalid records carrying the error, so sweeps are total.
std::vector<QuantifiedRecord> quantify_sample(const TaskSpec& task, const CriteriaSet& cs, const TaskSample& sample,
                                              std::uint64_t seed, const QuantifyConfig& cfg, const AgentContext& ctx);

// |corpus| x |criteria| x seeds records for seeds 1..cfg.seeds, sorted by
// (sample_id, criterion, seed).
std::vector<QuantifiedRecord> sweep_seeds(const TaskSpec& task, const CriteriaSet& cs,
                                          std::span<const TaskSample> corpus, const QuantifyConfig& cfg,
                                          const AgentContext& ctx);

// U_t(s): criterion -> valid scores in seed order, for one sample.
struct UtilityAssessment {
  std::string sample_id;
  std::map<std::string, std::vector<int>> scores;
};

std::vector<UtilityAssessment> utility_assessments(std::span<const QuantifiedRecord> records, const CriteriaSet& cs);

}  // namespace agenteval
