#include <algorithm>
#include <set>

#include "agenteval/errors.hpp"
#include "agenteval/perturb.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace agenteval;
using namespace agenteval::testing;

namespace {

std::string sentences(std::size_t n, const std::string& tag = "S") {
  std::string out;
  for (std::size_t i = 0; i < n; ++i) out += (i ? " " : "") + tag + std::to_string(i) + " holds.";
  return out;
}

// Random text from fragments that exercise every boundary rule.
std::string random_text(SplitMix64& rng) {
  static const std::vector<std::string> parts = {
      "Word", " ", "  ", ".", "!", "?", "...", "\n", "\n\n", "\n  \n", "```py\nx = 1.\n```", "```", "3.14",
      "e.g.", "\t", "é", "Done", "(a)", "\r\n"};
  std::string out;
  const std::size_t len = rng.below(30);
  for (std::size_t i = 0; i < len; ++i) out += parts[rng.below(parts.size())];
  return out;
}

}  // namespace

TEST_CASE("split examples") {
  CHECK(split_units("A. B! C?") == std::vector<std::string>{"A.", "B!", "C?"});
  CHECK(split_units("```python\nprint(1). x = 2! y\n\nz\n```") ==
        std::vector<std::string>{"```python\nprint(1). x = 2! y\n\nz\n```"});
  CHECK(split_units("").empty());
  CHECK(split_units("   \n").empty());
  CHECK(split_units("Pi is 3.14 here. Next") == std::vector<std::string>{"Pi is 3.14 here.", "Next"});
  CHECK(split_units("Wait... really?! Yes") == std::vector<std::string>{"Wait...", "really?!", "Yes"});
  CHECK(split_units("First para\n\nSecond para") == std::vector<std::string>{"First para", "Second para"});
  CHECK(split_units("line one\nline two") == std::vector<std::string>{"line one\nline two"});
  CHECK(split_units("Run this:\n```\ncode\n```\nThen done.") ==
        std::vector<std::string>{"Run this:", "```\ncode\n```", "Then done."});
  CHECK(split_units("```\nunclosed fence. still code") == std::vector<std::string>{"```\nunclosed fence. still code"});
}

TEST_CASE("segments reconstruct any text exactly") {
  SplitMix64 rng(31);
  for (int t = 0; t < 3000; ++t) {
    const std::string text = random_text(rng);
    const auto seg = segment_text(text);
    CHECK(seg.separators.size() == seg.units.size() + 1);
    CHECK(seg.join() == text);
    for (const auto& u : seg.units) {
      CHECK_FALSE(u.empty());
      CHECK(u.front() != ' ');
      CHECK(u.back() != ' ');
    }
  }
}

TEST_CASE("removal count rule") {
  CHECK(removal_count(0.25, 8) == 2);
  CHECK(removal_count(0.25, 6) == 2);  // 1.5 rounds up
  CHECK(removal_count(0.25, 2) == 1);
  CHECK(removal_count(0.25, 1) == 0);
  CHECK(removal_count(0.0, 10) == 0);
  CHECK(removal_count(0.01, 10) == 1);
  CHECK(removal_count(0.99, 10) == 9);
  CHECK_THROWS_AS(removal_count(1.0, 10), PreconditionError);
  CHECK_THROWS_AS(removal_count(-0.1, 10), PreconditionError);
  for (std::size_t n = 2; n < 60; ++n) {
    for (double f : {0.05, 0.25, 0.5, 0.75, 0.95}) {
      const std::size_t k = removal_count(f, n);
      CHECK(k >= 1);
      CHECK(k <= n - 1);
    }
  }
}

TEST_CASE("8 units at 25% lose exactly 2") {
  const auto s = simple_sample("q1", sentences(8));
  const auto d = disturb_sample(s, {0.25, 7});
  CHECK(d.removed_units.size() == 2);
  CHECK(split_units(d.sample.messages[1].content).size() == 6);
  CHECK(d.sample.id == "q1#disturbed");
  CHECK(d.original_id == "q1");
  CHECK(d.sample.meta.at("disturbed_from") == "q1");
  CHECK(d.sample.meta.at("removed_units") == encode_unit_refs(d.removed_units));
  CHECK(s.messages[1].content == sentences(8));
}

TEST_CASE("fraction 0 leaves the text alone") {
  const auto s = simple_sample("q1", sentences(5));
  const auto d = disturb_sample(s, {0.0, 3});
  CHECK(d.removed_units.empty());
  CHECK(d.sample.messages == s.messages);
  CHECK(d.sample.meta.at("removed_units").empty());
}

TEST_CASE("determinism and seed dependence") {
  const auto s = simple_sample("q9", sentences(20));
  CHECK(disturb_sample(s, {0.25, 11}).removed_units == disturb_sample(s, {0.25, 11}).removed_units);
  std::set<std::vector<UnitRef>> distinct;
  for (std::uint64_t seed = 0; seed < 20; ++seed) distinct.insert(disturb_sample(s, {0.25, seed}).removed_units);
  CHECK(distinct.size() > 1);
  // the removal draw follows the documented generator
  SplitMix64 rng(11 ^ fnv1a64("q9"));
  const auto order = seeded_permutation(20, rng);
  std::vector<UnitRef> expect;
  for (std::size_t i = 0; i < 5; ++i) expect.push_back({1, order[i]});
  std::sort(expect.begin(), expect.end());
  CHECK(disturb_sample(s, {0.25, 11}).removed_units == expect);
}

TEST_CASE("no assistant message") {
  TaskSample s;
  s.id = "x";
  s.messages = {{"user", "hi"}};
  CHECK_THROWS_AS(disturb_sample(s, {}), PreconditionError);
}

TEST_CASE("property: only assistant content changes and n-k units remain") {
  SplitMix64 rng(77);
  for (int t = 0; t < 500; ++t) {
    TaskSample s;
    s.id = "gen-" + std::to_string(t);
    const std::size_t msgs = 1 + rng.below(5);
    bool has_assistant = false;
    for (std::size_t m = 0; m < msgs; ++m) {
      const bool assistant = rng.below(2) == 0 || (m + 1 == msgs && !has_assistant);
      has_assistant |= assistant;
      s.messages.push_back({assistant ? "assistant" : (rng.below(2) ? "user" : "system"),
                            sentences(rng.below(7), "M" + std::to_string(m) + "s")});
    }
    const double fraction = rng.below(4) == 0 ? 0.0 : rng.unit() * 0.95;
    const auto d = disturb_sample(s, {fraction, rng.next()});

    std::size_t n = 0;
    std::size_t remaining = 0;
    REQUIRE(d.sample.messages.size() == s.messages.size());
    for (std::size_t m = 0; m < s.messages.size(); ++m) {
      CHECK(d.sample.messages[m].role == s.messages[m].role);
      if (s.messages[m].role != "assistant") {
        CHECK(d.sample.messages[m].content == s.messages[m].content);
        continue;
      }
      const auto before = split_units(s.messages[m].content);
      const auto after = split_units(d.sample.messages[m].content);
      n += before.size();
      remaining += after.size();
      // kept units are the originals minus the removed indices, in order
      std::vector<std::string> expect;
      for (std::size_t u = 0; u < before.size(); ++u) {
        if (!std::binary_search(d.removed_units.begin(), d.removed_units.end(), UnitRef{m, u})) {
          expect.push_back(before[u]);
        }
      }
      CHECK(after == expect);
    }
    const std::size_t k = removal_count(fraction, n);
    CHECK(d.removed_units.size() == k);
    CHECK(remaining == n - k);
    CHECK(std::is_sorted(d.removed_units.begin(), d.removed_units.end()));
  }
}

TEST_CASE("corpus disturbance keeps order and ids") {
  const auto corpus = math_samples();
  const auto d = disturb_corpus(corpus, {0.25, 0});
  REQUIRE(d.size() == corpus.size());
  for (std::size_t i = 0; i < d.size(); ++i) {
    CHECK(d[i].id == corpus[i].id + "#disturbed");
    CHECK(d[i].is_successful == corpus[i].is_successful);
    CHECK(d[i].messages[0] == corpus[i].messages[0]);
    std::size_t before = 0;
    std::size_t after = 0;
    for (std::size_t m = 0; m < d[i].messages.size(); ++m) {
      before += corpus[i].messages[m].content.size();
      after += d[i].messages[m].content.size();
    }
    CHECK(after < before);
  }
}
