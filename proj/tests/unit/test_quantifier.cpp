#include <set>
#include <tuple>

#include "agenteval/errors.hpp"
#include "agenteval/quantifier.hpp"
#include "doctest.h"
#include "test_support.hpp"

using namespace agenteval;
using namespace agenteval::testing;

namespace {

const char* kTable1Reply =
    R"({"Clarity":"Very Clear","Efficiency":"Efficient","Error Analysis":"Not Addressed","Completeness":"Complete"})";

std::vector<TaskSample> generated_corpus(std::size_t n) {
  std::vector<TaskSample> out;
  for (std::size_t i = 0; i < n; ++i) {
    auto s = simple_sample("p" + std::to_string(1000 + i), "Compute. The answer is " + std::to_string(i) + ".", i % 2 == 0);
    s.meta["level"] = "Level 5";
    out.push_back(s);
  }
  return out;
}

CriteriaSet first_n(std::size_t n) {
  CriteriaSet cs = table1();
  cs.criteria.resize(n);
  return cs;
}

}  // namespace

TEST_CASE("Table-1 labels map to scores 2,2,0,2") {
  auto backend = std::make_shared<FnBackend>([](const ChatRequest&) { return std::string(kTable1Reply); });
  const auto recs = quantify_sample(math_task(), table1(), math_samples()[0], 1, {}, make_context(backend));
  REQUIRE(recs.size() == 4);
  std::vector<int> scores;
  for (const auto& r : recs) {
    CHECK(r.valid);
    CHECK(r.sample_id == "math-001");
    scores.push_back(r.score.value());
  }
  CHECK(scores == std::vector<int>{2, 2, 0, 2});
  CHECK(recs[2].label == "Not Addressed");
}

TEST_CASE("prose replies give invalid records for every criterion") {
  auto backend = std::make_shared<FnBackend>([](const ChatRequest&) { return std::string("It looks fine to me."); });
  const auto recs = quantify_sample(math_task(), table1(), math_samples()[0], 1, {}, make_context(backend));
  REQUIRE(recs.size() == 4);
  for (const auto& r : recs) {
    CHECK_FALSE(r.valid);
    CHECK_FALSE(r.score.has_value());
    CHECK(r.label.empty());
    CHECK(r.raw_fragment == "It looks fine to me.");
  }
}

TEST_CASE("partial replies mark only the missing criteria invalid") {
  auto backend = std::make_shared<FnBackend>(
      [](const ChatRequest&) { return std::string(R"({"clarity":"not clear","Efficiency":"Speedy"})"); });
  const auto recs = quantify_sample(math_task(), table1(), math_samples()[0], 1, {}, make_context(backend));
  CHECK(recs[0].valid);
  CHECK(recs[0].label == "Not Clear");
  CHECK_FALSE(recs[1].valid);
  CHECK(recs[1].raw_fragment.find("Speedy") != std::string::npos);
  CHECK_FALSE(recs[2].valid);
  CHECK_FALSE(recs[3].valid);
}

TEST_CASE("reply parsing") {
  const auto cs = table1();
  auto m = parse_quantifier_reply("Sure! {\"clarity\": \"very clear\"}", cs);
  CHECK(m == std::map<std::string, std::string>{{"Clarity", "Very Clear"}});
  CHECK(parse_quantifier_reply(R"({"Clarity": "Crystal"})", cs).empty());
  m = parse_quantifier_reply(R"({"Clarity": "Not Clear"} then {"Clarity": "Very Clear"})", cs);
  CHECK(m.at("Clarity") == "Not Clear");
  CHECK(parse_quantifier_reply("", cs).empty());
  CHECK(parse_quantifier_reply("{", cs).empty());
  CHECK(parse_quantifier_reply(R"({"Clarity": 2, "Unknown": "Very Clear"})", cs).empty());
  CHECK(parse_quantifier_reply(R"({"  ERROR analysis ": " well addressed "})", cs).at("Error Analysis") ==
        "Well Addressed");
}

TEST_CASE("parsing never throws on arbitrary text") {
  const auto cs = table1();
  SplitMix64 rng(3);
  const std::string alphabet = "{}[]\":, abcClarityVery\\n";
  for (int t = 0; t < 2000; ++t) {
    std::string s;
    const std::size_t len = rng.below(40);
    for (std::size_t i = 0; i < len; ++i) s += alphabet[rng.below(alphabet.size())];
    CHECK_NOTHROW(parse_quantifier_reply(s, cs));
  }
}

TEST_CASE("prompts never carry the success flag or meta") {
  auto backend = std::make_shared<FnBackend>([](const ChatRequest&) { return std::string(kTable1Reply); });
  const auto ctx = make_context(backend);
  auto samples = math_samples();
  for (auto& s : samples) s.meta["verdict"] = "is_successful";
  QuantifyConfig cfg;
  cfg.seeds = 2;
  sweep_seeds(math_task(), table1(), samples, cfg, ctx);
  const auto reqs = backend->requests();
  CHECK(reqs.size() == samples.size() * 2);
  for (const auto& r : reqs) {
    for (const auto& m : r.messages) {
      CHECK(m.content.find("successful") == std::string::npos);
      CHECK(m.content.find("is_successful") == std::string::npos);
      CHECK(m.content.find("Level") == std::string::npos);
    }
    CHECK(r.messages.back().content.find(math_task().description) != std::string::npos);
    CHECK(r.messages.back().content.find("Quality of code in terms of efficiency and elegance") != std::string::npos);
    CHECK(r.messages.back().content.find("Moderately Clear") != std::string::npos);
  }
}

TEST_CASE("buckets split the criteria across prompts") {
  auto backend = std::make_shared<FnBackend>([](const ChatRequest&) { return std::string(kTable1Reply); });
  QuantifyConfig cfg;
  cfg.bucket_size = 3;
  const auto recs = quantify_sample(math_task(), table1(), math_samples()[0], 4, cfg, make_context(backend));
  CHECK(recs.size() == 4);
  const auto reqs = backend->requests();
  REQUIRE(reqs.size() == 2);
  CHECK(reqs[0].messages.back().content.find("Error Analysis") != std::string::npos);
  CHECK(reqs[0].messages.back().content.find("Completeness") == std::string::npos);
  CHECK(reqs[1].messages.back().content.find("Completeness") != std::string::npos);
  // a reply about criteria outside the bucket does not leak into it
  CHECK(recs[3].valid);
}

TEST_CASE("backend errors give invalid records, not exceptions") {
  auto backend = std::make_shared<FnBackend>([](const ChatRequest& r) -> std::string {
    if (r.seed == 2) throw BackendError(BackendError::Kind::kStatus, "HTTP status 500", 500);
    return kTable1Reply;
  });
  QuantifyConfig cfg;
  cfg.seeds = 3;
  const auto recs = sweep_seeds(math_task(), table1(), math_samples(), cfg, make_context(backend));
  CHECK(recs.size() == 6 * 4 * 3);
  for (const auto& r : recs) {
    CHECK(r.valid == (r.seed != 2));
    if (r.seed == 2) CHECK(r.raw_fragment.find("backend error") != std::string::npos);
  }
  CHECK(invalid_fraction(recs) == doctest::Approx(1.0 / 3.0));
}

TEST_CASE("sweep counts, ordering and totality") {
  const auto ctx = make_context(std::make_shared<HashMockBackend>());
  QuantifyConfig cfg;
  cfg.seeds = 2;
  const auto corpus2 = generated_corpus(2);
  const auto recs = sweep_seeds(math_task(), first_n(3), corpus2, cfg, ctx);
  CHECK(recs.size() == 12);
  auto sorted = recs;
  sort_records(sorted);
  CHECK(sorted == recs);

  SplitMix64 rng(4);
  for (int t = 0; t < 10; ++t) {
    const std::size_t n = 1 + rng.below(5);
    const std::size_t k = 1 + rng.below(4);
    cfg.seeds = 1 + static_cast<int>(rng.below(4));
    cfg.bucket_size = rng.below(4);
    const auto corpus = generated_corpus(n);
    const auto out = sweep_seeds(math_task(), first_n(k), corpus, cfg, ctx);
    std::set<std::tuple<std::string, std::string, std::uint64_t>> seen;
    for (const auto& r : out) {
      CHECK(r.seed >= 1);
      CHECK(r.seed <= static_cast<std::uint64_t>(cfg.seeds));
      CHECK(seen.emplace(r.sample_id, r.criterion, r.seed).second);
      CHECK(r.valid == r.score.has_value());
    }
    CHECK(seen.size() == n * k * cfg.seeds);
  }
}

TEST_CASE("18 seeds over 120 samples and 4 criteria give 8640 records") {
  const auto ctx = make_context(std::make_shared<HashMockBackend>(), 8);
  const auto corpus = generated_corpus(120);
  const auto recs = sweep_seeds(math_task(), table1(), corpus, {}, ctx);
  CHECK(recs.size() == 8640);
  CHECK(invalid_fraction(recs) == 0.0);
}

TEST_CASE("sweeps are deterministic and independent of parallelism") {
  QuantifyConfig cfg;
  cfg.seeds = 3;
  const auto a = sweep_seeds(math_task(), table1(), math_samples(), cfg, make_context(std::make_shared<HashMockBackend>(), 1));
  const auto b = sweep_seeds(math_task(), table1(), math_samples(), cfg, make_context(std::make_shared<HashMockBackend>(), 6));
  CHECK(a == b);
  const auto s = math_samples()[2];
  const auto ctx = make_context(std::make_shared<HashMockBackend>());
  CHECK(quantify_sample(math_task(), table1(), s, 5, {}, ctx) == quantify_sample(math_task(), table1(), s, 5, {}, ctx));
}

TEST_CASE("preconditions") {
  const auto ctx = make_context(std::make_shared<HashMockBackend>());
  CHECK_THROWS_AS(sweep_seeds(math_task(), table1(), {}, {}, ctx), PreconditionError);
  CHECK_THROWS_AS(sweep_seeds(math_task(), CriteriaSet{}, math_samples(), {}, ctx), PreconditionError);
  QuantifyConfig zero;
  zero.seeds = 0;
  CHECK_THROWS_AS(sweep_seeds(math_task(), table1(), math_samples(), zero, ctx), PreconditionError);
}

TEST_CASE("utility assessments keep every criterion key and only valid scores") {
  std::vector<QuantifiedRecord> recs;
  const auto add = [&](std::string sid, std::string c, std::uint64_t seed, std::optional<int> score) {
    QuantifiedRecord r;
    r.sample_id = sid;
    r.criterion = c;
    r.seed = seed;
    r.valid = score.has_value();
    r.score = score;
    recs.push_back(r);
  };
  add("b", "Clarity", 2, 1);
  add("b", "Clarity", 1, 0);
  add("b", "Efficiency", 1, std::nullopt);
  add("a", "clarity", 1, 2);
  const auto ua = utility_assessments(recs, table1());
  REQUIRE(ua.size() == 2);
  CHECK(ua[0].sample_id == "a");
  CHECK(ua[0].scores.size() == 4);
  CHECK(ua[0].scores.at("Clarity") == std::vector<int>{2});
  CHECK(ua[1].scores.at("Clarity") == std::vector<int>{0, 1});
  CHECK(ua[1].scores.at("Efficiency").empty());
}
