#pragma once
// Criteria elicitation: one critic run asks the model for a rubric, a batch
// repeats that over consecutive seeds, and summarization consolidates the
// batch into a single candidate set.

#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "agenteval/context.hpp"
#include "agenteval/criteria.hpp"
#include "agenteval/errors.hpp"
#include "agenteval/samples.hpp"
#include "json.hpp"

namespace agenteval {

enum class CriticMode { kTaskBased, kSolutionBased };

struct CriticConfig {
  CriticMode mode = CriticMode::kTaskBased;
  int runs = 50;
  int examples_per_prompt = 2;
  std::uint64_t seed_base = 0;
};

// Raised when the reply still fails to parse after the re-asks.
class CriticReplyError : public Error {
 public:
  CriticReplyError(const std::string& what, std::string raw_reply)
      : Error(what), raw_reply_(std::move(raw_reply)) {}
  const std::string& raw_reply() const { return raw_reply_; }

 private:
  std::string raw_reply_;
};

class CriticBatchError : public Error {
 public:
  using Error::Error;
};

inline constexpr int kMaxReasks = 2;

// Indices into pool of the examples shown to a solution-based critic run.
// When flags allow, the lowest-id successful and lowest-id failed executions
// come first in seed-dependent order; remaining slots are a seeded draw. A pure
// function of (pool, count, seed).
std::vector<std::size_t> select_examples(std::span<const TaskSample> pool, int count, std::uint64_t seed);

// Accepts a JSON list of criteria anywhere in the reply (or an object with a
// "criteria" list). Labels such as "Very Clear (2)" lose the ordinal suffix;
// an accepted_values object {label: ordinal} is ordered by ordinal.
std::vector<Criterion> parse_criteria_reply(std::string_view reply);

ChatRequest build_critic_request(const TaskSpec& task, std::span<const TaskSample> examples, CriticMode mode,
                                 std::uint64_t seed, const AgentContext& ctx);

struct CriticResult {
  CriteriaSet criteria;
  std::vector<std::string> raw_replies;  // one per attempt
};

CriticResult generate_criteria(const TaskSpec& task, std::span<const TaskSample> samples,
                               const CriticConfig& cfg, std::uint64_t seed, const AgentContext& ctx);

struct CriticFailure {
  int run = 0;
  std::uint64_t seed = 0;
  std::string error;
  std::string raw_reply;
};

struct CriticBatch {
  std::vector<CriteriaSet> sets;     // successful runs, in run order
  std::vector<std::uint64_t> seeds;  // seed of each entry in sets
  std::vector<CriticFailure> failures;
  std::vector<nlohmann::ordered_json> audit;  // raw replies per run/attempt
};

// Run i (1-based) uses seed seed_base + i. Fails when more than 20% of runs fail.
CriticBatch run_critic_batch(const TaskSpec& task, std::span<const TaskSample> samples,
                             const CriticConfig& cfg, const AgentContext& ctx);

struct SummaryResult {
  CriteriaSet criteria;
  bool used_llm = false;
  std::vector<nlohmann::ordered_json> audit;
};

// Union of all sets keeping the first criterion of each case-folded name.
CriteriaSet merge_exact_names(std::span<const CriteriaSet> sets);

// With a context, asks the model to consolidate the union and re-validates the
// reply; without one (or when the reply is unusable) falls back to
// merge_exact_names. Similarity dedup runs as a separate stage afterwards.
SummaryResult summarize_criteria(std::span<const CriteriaSet> sets, const TaskSpec& task,
                                 const AgentContext* ctx, std::uint64_t seed = 0);

std::string serialize_criteria_lines(std::span<const CriteriaSet> sets);
std::vector<CriteriaSet> parse_criteria_lines(std::string_view jsonl);
std::string serialize_audit(std::span<const nlohmann::ordered_json> audit);

}  // namespace agenteval
