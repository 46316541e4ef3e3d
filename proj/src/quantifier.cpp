#include "agenteval/quantifier.hpp"

#include <algorithm>
#include <optional>

#include "agenteval/errors.hpp"
#include "agenteval/parallel.hpp"
#include "agenteval/util.hpp"
#include "json.hpp"

namespace agenteval {

namespace {

struct Match {
  std::string label;
  std::string raw;
};

std::string clip_utf8(std::string_view text, std::size_t limit) {
  if (text.size() <= limit) return std::string(text);
  std::size_t cut = limit;
  while (cut > 0 && (static_cast<unsigned char>(text[cut]) & 0xC0) == 0x80) --cut;
  return std::string(text.substr(0, cut));
}

// Reply parsing shared by the public parser and record construction. Keys are
// the criterion names as spelled in cs.
std::map<std::string, Match> match_reply(std::string_view reply, const CriteriaSet& cs,
                                         std::map<std::string, std::string>* unmatched_raw) {
  std::map<std::string, Match> out;
  const auto obj = first_json_object(reply);
  if (!obj) return out;
  const auto j = nlohmann::ordered_json::parse(*obj, nullptr, false);
  if (j.is_discarded()) return out;
  for (const auto& [key, value] : j.items()) {
    const Criterion* c = cs.find(key);
    if (c == nullptr || out.contains(c->name)) continue;
    const std::string raw = value.dump(-1, ' ', false, nlohmann::json::error_handler_t::replace);
    if (value.is_string()) {
      const int idx = find_label(*c, value.get<std::string>());
      if (idx >= 0) {
        out[c->name] = {c->accepted_values[static_cast<std::size_t>(idx)], raw};
        continue;
      }
    }
    if (unmatched_raw != nullptr && !unmatched_raw->contains(c->name)) (*unmatched_raw)[c->name] = raw;
  }
  return out;
}

std::string render_criteria_block(std::span<const Criterion> bucket) {
  nlohmann::ordered_json j = nlohmann::ordered_json::object();
  for (const auto& c : bucket) {
    j[c.name] = {{"description", c.description}, {"accepted_values", c.accepted_values}};
  }
  return j.dump(2);
}

}  // namespace

std::map<std::string, std::string> parse_quantifier_reply(std::string_view reply, const CriteriaSet& cs) {
  std::map<std::string, std::string> out;
  for (auto& [name, m] : match_reply(reply, cs, nullptr)) out[name] = std::move(m.label);
  return out;
}

ChatRequest build_quantifier_request(const TaskSpec& task, std::span<const Criterion> bucket,
                                     const TaskSample& sample, std::uint64_t seed, const AgentContext& ctx) {
  ChatRequest req;
  req.model = ctx.model;
  req.temperature = ctx.temperature;
  req.seed = seed;
  req.messages.push_back({"system", trim(ctx.prompts->get("quantifier/system.txt"))});
  req.messages.push_back({"user", trim(ctx.prompts->render("quantifier/quantify.txt",
                                                           {{"task_description", task.description},
                                                            {"criteria", render_criteria_block(bucket)},
                                                            {"problem", sample.problem},
                                                            {"transcript", render_transcript(sample.messages)}}))});
  return req;
}

std::vector<QuantifiedRecord> quantify_sample(const TaskSpec& task, const CriteriaSet& cs, const TaskSample& sample,
                                              std::uint64_t seed, const QuantifyConfig& cfg, const AgentContext& ctx) {
  if (cs.criteria.empty()) throw PreconditionError("quantify needs a non-empty criteria set");
  if (sample.messages.empty()) throw PreconditionError("sample " + sample.id + " has no messages");

  const std::size_t n = cs.criteria.size();
  const std::size_t k = cfg.bucket_size == 0 ? n : std::min(cfg.bucket_size, n);
  std::vector<QuantifiedRecord> records;
  records.reserve(n);
  for (std::size_t begin = 0; begin < n; begin += k) {
    const std::span<const Criterion> bucket(cs.criteria.data() + begin, std::min(k, n - begin));
    std::string reply;
    std::string failure;
    try {
      reply = ctx.chat->complete_chat(build_quantifier_request(task, bucket, sample, seed, ctx)).content;
    } catch (const BackendError& e) {
      failure = std::string("backend error: ") + e.what();
    }
    std::map<std::string, std::string> unmatched;
    const auto matched = failure.empty() ? match_reply(reply, cs, &unmatched) : std::map<std::string, Match>{};
    for (const auto& c : bucket) {
      QuantifiedRecord r;
      r.sample_id = sample.id;
      r.criterion = c.name;
      r.seed = seed;
      if (auto it = matched.find(c.name); it != matched.end()) {
        r.valid = true;
        r.label = it->second.label;
        r.score = ordinal_score(c, r.label);
        r.raw_fragment = it->second.raw;
      } else if (!failure.empty()) {
        r.raw_fragment = failure;
      } else if (auto u = unmatched.find(c.name); u != unmatched.end()) {
        r.raw_fragment = u->second;
      } else {
        r.raw_fragment = clip_utf8(reply, 200);
      }
      records.push_back(std::move(r));
    }
  }
  return records;
}

std::vector<QuantifiedRecord> sweep_seeds(const TaskSpec& task, const CriteriaSet& cs,
                                          std::span<const TaskSample> corpus, const QuantifyConfig& cfg,
                                          const AgentContext& ctx) {
  if (corpus.empty()) throw PreconditionError("sweep needs a non-empty corpus");
  if (cs.criteria.empty()) throw PreconditionError("sweep needs a non-empty criteria set");
  if (cfg.seeds < 1) throw PreconditionError("seeds must be >= 1");

  const auto seeds = static_cast<std::size_t>(cfg.seeds);
  std::vector<std::vector<QuantifiedRecord>> slots(corpus.size() * seeds);
  parallel_for(slots.size(), ctx.parallelism, [&](std::size_t t) {
    const TaskSample& s = corpus[t / seeds];
    const std::uint64_t seed = t % seeds + 1;
    slots[t] = quantify_sample(task, cs, s, seed, cfg, ctx);
  });

  std::vector<QuantifiedRecord> out;
  out.reserve(slots.size() * cs.criteria.size());
  for (auto& slot : slots) {
    for (auto& r : slot) out.push_back(std::move(r));
  }
  sort_records(out);
  return out;
}

std::vector<UtilityAssessment> utility_assessments(std::span<const QuantifiedRecord> records, const CriteriaSet& cs) {
  std::map<std::string, UtilityAssessment> by_sample;
  std::vector<const QuantifiedRecord*> ordered;
  for (const auto& r : records) ordered.push_back(&r);
  std::stable_sort(ordered.begin(), ordered.end(), [](auto* a, auto* b) { return a->seed < b->seed; });
  for (const auto* r : ordered) {
    auto& ua = by_sample[r->sample_id];
    if (ua.sample_id.empty()) {
      ua.sample_id = r->sample_id;
      for (const auto& c : cs.criteria) ua.scores[c.name];
    }
    const Criterion* c = cs.find(r->criterion);
    if (c != nullptr && r->valid && r->score) ua.scores[c->name].push_back(*r->score);
  }
  std::vector<UtilityAssessment> out;
  for (auto& [id, ua] : by_sample) out.push_back(std::move(ua));
  return out;
}

}  // namespace agenteval
