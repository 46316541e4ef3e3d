#include "agenteval/critic.hpp"

#include <algorithm>
#include <regex>
#include <set>

#include "agenteval/parallel.hpp"
#include "agenteval/util.hpp"

namespace agenteval {

namespace {

std::string strip_ordinal_suffix(const std::string& label) {
  static const std::regex kSuffix(R"(\s*\(\s*-?\d+\s*\)\s*$)");
  return trim(std::regex_replace(label, kSuffix, ""));
}

Criterion criterion_from_reply(const nlohmann::json& j) {
  if (!j.is_object()) throw FormatError("criterion entry is not an object");
  nlohmann::json copy = j;
  if (auto it = copy.find("accepted_values"); it != copy.end() && it->is_object()) {
    std::vector<std::pair<double, std::string>> ranked;
    for (const auto& [label, ordinal] : it->items()) {
      if (!ordinal.is_number()) throw FormatError("accepted_values object needs numeric ordinals");
      ranked.emplace_back(ordinal.get<double>(), label);
    }
    std::stable_sort(ranked.begin(), ranked.end(),
                     [](const auto& a, const auto& b) { return a.first < b.first; });
    nlohmann::json list = nlohmann::json::array();
    for (const auto& r : ranked) list.push_back(r.second);
    *it = std::move(list);
  }
  Criterion c = criterion_from_json(copy);
  for (auto& v : c.accepted_values) v = strip_ordinal_suffix(v);
  c.name = trim(c.name);
  c.description = trim(c.description);
  return c;
}

std::string describe_outcome(const TaskSample& s) {
  if (!s.is_successful) return "unknown";
  return *s.is_successful ? "successful" : "failed";
}

std::string render_examples(std::span<const TaskSample> examples) {
  std::string out;
  for (std::size_t i = 0; i < examples.size(); ++i) {
    const auto& s = examples[i];
    if (i > 0) out += "\n\n";
    out += "Example " + std::to_string(i + 1) + " (outcome: " + describe_outcome(s) + ")\n";
    out += "Problem: " + s.problem + "\n";
    out += "Transcript:\n" + render_transcript(s.messages);
  }
  return out;
}

CriteriaSet to_set(const TaskSpec& task, std::vector<Criterion> criteria, Provenance provenance) {
  CriteriaSet cs;
  cs.task_name = task.name;
  cs.provenance = provenance;
  cs.criteria = std::move(criteria);
  validate(cs);
  return cs;
}

}  // namespace

std::vector<std::size_t> select_examples(std::span<const TaskSample> pool, int count, std::uint64_t seed) {
  const std::size_t want = std::min<std::size_t>(static_cast<std::size_t>(std::max(count, 0)), pool.size());
  std::vector<std::size_t> by_id(pool.size());
  for (std::size_t i = 0; i < pool.size(); ++i) by_id[i] = i;
  std::sort(by_id.begin(), by_id.end(), [&](std::size_t a, std::size_t b) { return pool[a].id < pool[b].id; });

  SplitMix64 rng(seed);
  std::vector<std::size_t> succeeded;
  std::vector<std::size_t> failed;
  for (std::size_t i : by_id) {
    if (!pool[i].is_successful) continue;
    (*pool[i].is_successful ? succeeded : failed).push_back(i);
  }

  std::vector<std::size_t> chosen;
  if (want >= 2 && !succeeded.empty() && !failed.empty()) {
    const std::size_t s = succeeded.front();
    const std::size_t f = failed.front();
    if (rng.below(2) == 0) {
      chosen = {s, f};
    } else {
      chosen = {f, s};
    }
  }
  const auto order = seeded_permutation(by_id.size(), rng);
  for (std::size_t k = 0; k < order.size() && chosen.size() < want; ++k) {
    const std::size_t idx = by_id[order[k]];
    if (std::find(chosen.begin(), chosen.end(), idx) == chosen.end()) chosen.push_back(idx);
  }
  return chosen;
}

std::vector<Criterion> parse_criteria_reply(std::string_view reply) {
  nlohmann::json list;
  if (auto arr = first_json_array(reply)) {
    list = nlohmann::json::parse(*arr);
  } else if (auto obj = first_json_object(reply)) {
    auto j = nlohmann::json::parse(*obj);
    if (!j.contains("criteria") || !j["criteria"].is_array()) throw FormatError("reply contains no criteria list");
    list = j["criteria"];
  } else {
    throw FormatError("reply contains no JSON list");
  }
  if (list.empty()) throw FormatError("reply lists no criteria");
  std::vector<Criterion> out;
  for (const auto& item : list) out.push_back(criterion_from_reply(item));
  return out;
}

ChatRequest build_critic_request(const TaskSpec& task, std::span<const TaskSample> examples, CriticMode mode,
                                 std::uint64_t seed, const AgentContext& ctx) {
  ChatRequest req;
  req.model = ctx.model;
  req.temperature = ctx.temperature;
  req.seed = seed;
  req.messages.push_back({"system", trim(ctx.prompts->get("critic/system.txt"))});
  PromptVars vars{{"task_description", task.description}};
  if (mode == CriticMode::kSolutionBased) {
    vars["examples"] = render_examples(examples);
    req.messages.push_back({"user", trim(ctx.prompts->render("critic/solution_based.txt", vars))});
  } else {
    req.messages.push_back({"user", trim(ctx.prompts->render("critic/task_based.txt", vars))});
  }
  return req;
}

CriticResult generate_criteria(const TaskSpec& task, std::span<const TaskSample> samples,
                               const CriticConfig& cfg, std::uint64_t seed, const AgentContext& ctx) {
  std::vector<TaskSample> examples;
  if (cfg.mode == CriticMode::kSolutionBased) {
    if (samples.empty()) throw PreconditionError("solution-based critic needs a non-empty sample pool");
    for (std::size_t i : select_examples(samples, cfg.examples_per_prompt, seed)) examples.push_back(samples[i]);
  }
  const Provenance provenance =
      cfg.mode == CriticMode::kSolutionBased ? Provenance::kSolutionBased : Provenance::kTaskBased;

  ChatRequest req = build_critic_request(task, examples, cfg.mode, seed, ctx);
  CriticResult result;
  for (int attempt = 0;; ++attempt) {
    const ChatReply reply = ctx.chat->complete_chat(req);
    result.raw_replies.push_back(reply.content);
    try {
      result.criteria = to_set(task, parse_criteria_reply(reply.content), provenance);
      return result;
    } catch (const FormatError& e) {
      if (attempt >= kMaxReasks) {
        throw CriticReplyError("critic reply unusable after " + std::to_string(kMaxReasks) +
                                   " re-asks: " + e.what(),
                               reply.content);
      }
      req.messages.push_back({"assistant", reply.content});
      req.messages.push_back({"user", trim(ctx.prompts->render("critic/reask.txt", {{"error", e.what()}}))});
    }
  }
}

CriticBatch run_critic_batch(const TaskSpec& task, std::span<const TaskSample> samples,
                             const CriticConfig& cfg, const AgentContext& ctx) {
  if (cfg.runs < 1) throw PreconditionError("critic runs must be >= 1");
  if (cfg.mode == CriticMode::kSolutionBased && samples.empty()) {
    throw PreconditionError("solution-based critic needs a non-empty sample pool");
  }
  const auto n = static_cast<std::size_t>(cfg.runs);
  std::vector<std::optional<CriticResult>> results(n);
  std::vector<std::optional<CriticFailure>> failures(n);

  parallel_for(n, ctx.parallelism, [&](std::size_t i) {
    const int run = static_cast<int>(i) + 1;
    const std::uint64_t seed = cfg.seed_base + static_cast<std::uint64_t>(run);
    try {
      results[i] = generate_criteria(task, samples, cfg, seed, ctx);
    } catch (const CriticReplyError& e) {
      failures[i] = CriticFailure{run, seed, e.what(), e.raw_reply()};
    } catch (const PreconditionError&) {
      throw;
    } catch (const Error& e) {
      failures[i] = CriticFailure{run, seed, e.what(), {}};
    }
  });

  CriticBatch batch;
  for (std::size_t i = 0; i < n; ++i) {
    const int run = static_cast<int>(i) + 1;
    const std::uint64_t seed = cfg.seed_base + static_cast<std::uint64_t>(run);
    if (results[i]) {
      for (std::size_t a = 0; a < results[i]->raw_replies.size(); ++a) {
        batch.audit.push_back(
            {{"run", run}, {"seed", seed}, {"attempt", a}, {"reply", results[i]->raw_replies[a]}});
      }
      batch.sets.push_back(std::move(results[i]->criteria));
      batch.seeds.push_back(seed);
    } else {
      batch.audit.push_back(
          {{"run", run}, {"seed", seed}, {"error", failures[i]->error}, {"reply", failures[i]->raw_reply}});
      batch.failures.push_back(std::move(*failures[i]));
    }
  }
  if (batch.failures.size() * 5 > n) {
    throw CriticBatchError(std::to_string(batch.failures.size()) + " of " + std::to_string(n) +
                           " critic runs failed (first: " + batch.failures.front().error + ")");
  }
  return batch;
}

CriteriaSet merge_exact_names(std::span<const CriteriaSet> sets) {
  CriteriaSet out;
  out.provenance = Provenance::kSummarized;
  if (!sets.empty()) out.task_name = sets.front().task_name;
  std::set<std::string> seen;
  for (const auto& cs : sets) {
    for (const auto& c : cs.criteria) {
      if (seen.insert(fold(c.name)).second) out.criteria.push_back(c);
    }
  }
  return out;
}

SummaryResult summarize_criteria(std::span<const CriteriaSet> sets, const TaskSpec& task, const AgentContext* ctx,
                                 std::uint64_t seed) {
  if (sets.empty()) throw PreconditionError("summarize needs at least one criteria set");
  SummaryResult result;
  CriteriaSet merged = merge_exact_names(sets);
  if (ctx == nullptr || !ctx->chat) {
    result.criteria = std::move(merged);
    result.audit.push_back({{"stage", "summarize"}, {"path", "fallback"}, {"reason", "no backend"}});
    return result;
  }

  nlohmann::ordered_json candidates = nlohmann::ordered_json::array();
  for (const auto& cs : sets) {
    for (const auto& c : cs.criteria) candidates.push_back(criterion_to_json(c));
  }
  ChatRequest req;
  req.model = ctx->model;
  req.temperature = ctx->temperature;
  req.seed = seed;
  req.messages.push_back({"system", trim(ctx->prompts->get("critic/system.txt"))});
  req.messages.push_back({"user", trim(ctx->prompts->render(
                                      "critic/summarize.txt",
                                      {{"task_description", task.description}, {"criteria", candidates.dump(2)}}))});

  std::string raw;
  try {
    raw = ctx->chat->complete_chat(req).content;
    result.audit.push_back({{"stage", "summarize"}, {"reply", raw}});
    CriteriaSet cs;
    cs.task_name = merged.task_name;
    cs.provenance = Provenance::kSummarized;
    cs.criteria = parse_criteria_reply(raw);
    validate(cs);
    std::set<std::string> known;
    for (const auto& c : merged.criteria) known.insert(fold(c.name));
    for (const auto& c : cs.criteria) {
      if (!known.contains(fold(c.name))) {
        result.audit.push_back({{"stage", "summarize"}, {"event", "rename"}, {"name", c.name}});
      }
    }
    result.criteria = std::move(cs);
    result.used_llm = true;
  } catch (const Error& e) {
    result.audit.push_back({{"stage", "summarize"}, {"path", "fallback"}, {"reason", e.what()}});
    result.criteria = std::move(merged);
  }
  return result;
}

std::string serialize_criteria_lines(std::span<const CriteriaSet> sets) {
  std::string out;
  for (const auto& cs : sets) {
    out += criteria_to_json(cs).dump();
    out += '\n';
  }
  return out;
}

std::vector<CriteriaSet> parse_criteria_lines(std::string_view jsonl) {
  std::vector<CriteriaSet> out;
  std::size_t pos = 0;
  std::size_t line_no = 0;
  while (pos < jsonl.size()) {
    std::size_t end = jsonl.find('\n', pos);
    if (end == std::string_view::npos) end = jsonl.size();
    const std::string_view line = jsonl.substr(pos, end - pos);
    pos = end + 1;
    ++line_no;
    if (trim(line).empty()) continue;
    try {
      out.push_back(parse_criteria(line));
    } catch (const FormatError& e) {
      throw FormatError("criteria line " + std::to_string(line_no) + ": " + e.what());
    }
  }
  return out;
}

std::string serialize_audit(std::span<const nlohmann::ordered_json> audit) {
  std::string out;
  for (const auto& j : audit) {
    out += j.dump();
    out += '\n';
  }
  return out;
}

}  // namespace agenteval
