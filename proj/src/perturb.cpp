#include "agenteval/perturb.hpp"

#include <algorithm>
#include <cmath>

#include "agenteval/errors.hpp"
#include "agenteval/util.hpp"

namespace agenteval {

namespace {

constexpr std::string_view kFence = "```";

bool is_space(char c) { return c == ' ' || c == '\t' || c == '\n' || c == '\r' || c == '\f' || c == '\v'; }
bool is_terminator(char c) { return c == '.' || c == '!' || c == '?'; }

bool fence_at(std::string_view text, std::size_t i) { return text.substr(i, kFence.size()) == kFence; }

// End (exclusive) of the prose unit starting at pos, before trailing whitespace trimming.
std::size_t prose_end(std::string_view text, std::size_t pos) {
  const std::size_t n = text.size();
  std::size_t i = pos;
  while (i < n) {
    const char c = text[i];
    if (i > pos && fence_at(text, i)) return i;
    if (is_terminator(c)) {
      std::size_t j = i;
      while (j < n && is_terminator(text[j])) ++j;
      if (j == n || is_space(text[j])) return j;
      i = j;
      continue;
    }
    if (c == '\n') {
      std::size_t k = i + 1;
      while (k < n && (text[k] == ' ' || text[k] == '\t' || text[k] == '\r')) ++k;
      if (k < n && text[k] == '\n') return i;
    }
    ++i;
  }
  return n;
}

}  // namespace

std::string TextSegments::join() const {
  std::string out = separators.empty() ? std::string{} : separators.front();
  for (std::size_t i = 0; i < units.size(); ++i) {
    out += units[i];
    out += separators[i + 1];
  }
  return out;
}

TextSegments segment_text(std::string_view text) {
  TextSegments seg;
  std::string sep;
  std::size_t pos = 0;
  const std::size_t n = text.size();
  while (pos < n) {
    while (pos < n && is_space(text[pos])) sep.push_back(text[pos++]);
    if (pos == n) break;
    std::size_t end;
    if (fence_at(text, pos)) {
      const std::size_t close = text.find(kFence, pos + kFence.size());
      end = close == std::string_view::npos ? n : close + kFence.size();
    } else {
      end = prose_end(text, pos);
    }
    while (end > pos && is_space(text[end - 1])) --end;
    seg.separators.push_back(std::move(sep));
    sep.clear();
    seg.units.emplace_back(text.substr(pos, end - pos));
    pos = end;
  }
  seg.separators.push_back(std::move(sep));
  return seg;
}

std::vector<std::string> split_units(std::string_view text) { return segment_text(text).units; }

std::size_t removal_count(double fraction, std::size_t n) {
  if (!(fraction >= 0.0 && fraction < 1.0)) throw PreconditionError("fraction must lie in [0, 1)");
  if (fraction == 0.0 || n < 2) return 0;
  const auto k = static_cast<std::size_t>(std::floor(fraction * static_cast<double>(n) + 0.5));
  return std::clamp<std::size_t>(k, 1, n - 1);
}

DisturbedSample disturb_sample(const TaskSample& s, const DisturbConfig& cfg) {
  if (!s.has_assistant_message()) throw PreconditionError("sample " + s.id + " has no assistant message");

  std::vector<TextSegments> segments(s.messages.size());
  std::vector<UnitRef> pool;
  for (std::size_t m = 0; m < s.messages.size(); ++m) {
    if (s.messages[m].role != "assistant") continue;
    segments[m] = segment_text(s.messages[m].content);
    for (std::size_t u = 0; u < segments[m].units.size(); ++u) pool.push_back({m, u});
  }

  const std::size_t k = removal_count(cfg.fraction, pool.size());
  SplitMix64 rng(cfg.seed ^ fnv1a64(s.id));
  const auto order = seeded_permutation(pool.size(), rng);

  DisturbedSample out;
  out.original_id = s.id;
  for (std::size_t i = 0; i < k; ++i) out.removed_units.push_back(pool[order[i]]);
  std::sort(out.removed_units.begin(), out.removed_units.end());

  out.sample = s;
  out.sample.id = s.id + std::string(kDisturbedSuffix);
  for (std::size_t m = 0; m < s.messages.size(); ++m) {
    if (s.messages[m].role != "assistant") continue;
    const TextSegments& seg = segments[m];
    std::vector<std::size_t> kept;
    for (std::size_t u = 0; u < seg.units.size(); ++u) {
      if (!std::binary_search(out.removed_units.begin(), out.removed_units.end(), UnitRef{m, u})) kept.push_back(u);
    }
    if (kept.size() == seg.units.size()) continue;
    std::string text = seg.separators.front();
    for (std::size_t t = 0; t < kept.size(); ++t) {
      text += seg.units[kept[t]];
      if (t + 1 < kept.size()) text += seg.separators[kept[t] + 1];
    }
    text += seg.separators.back();
    out.sample.messages[m].content = std::move(text);
  }
  out.sample.meta["disturbed_from"] = s.id;
  out.sample.meta["removed_units"] = encode_unit_refs(out.removed_units);
  return out;
}

std::vector<TaskSample> disturb_corpus(std::span<const TaskSample> corpus, const DisturbConfig& cfg) {
  std::vector<TaskSample> out;
  out.reserve(corpus.size());
  for (const auto& s : corpus) out.push_back(disturb_sample(s, cfg).sample);
  return out;
}

std::string encode_unit_refs(std::span<const UnitRef> refs) {
  std::string out;
  for (const auto& r : refs) {
    if (!out.empty()) out += ',';
    out += std::to_string(r.message) + ":" + std::to_string(r.unit);
  }
  return out;
}

}  // namespace agenteval
