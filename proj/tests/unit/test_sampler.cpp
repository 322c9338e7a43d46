#include "mixsearch/random.hpp"
#include "mixsearch/sampler.hpp"

#include "support.hpp"

#include <boost/math/distributions/chi_squared.hpp>
#include <doctest.h>

using namespace mixsearch;
using testsupport::DocSpec;
using testsupport::TempDir;

namespace {

DataAction action_with(std::array<double, 3> mixture) {
  DataAction a;
  a.mixture = mixture;
  return a;
}

double p(const BucketDistribution& d, Dataset ds, const std::string& bucket) {
  const auto it = d.probability.find({ds, bucket});
  return it == d.probability.end() ? 0.0 : it->second;
}

}  // namespace

TEST_CASE("effective distribution examples") {
  TempDir dir;
  SUBCASE("single bucket, no focus") {
    const Pool pool = testsupport::make_pool(dir.path(), {{"IF", "only", 5}});
    const auto d = effective_distribution(action_with({0, 0, 1}), pool);
    CHECK(d.probability.size() == 1);
    CHECK(p(d, Dataset::IF, "only") == doctest::Approx(1.0));
  }
  SUBCASE("one bucket per dataset follows the mixture") {
    const Pool pool = testsupport::make_pool(dir.path(), {{"XGUARD", "x", 5}, {"ORBENCH", "o", 5}, {"IF", "i", 5}});
    const auto d = effective_distribution(action_with({0.35, 0.45, 0.20}), pool);
    CHECK(p(d, Dataset::XGuard, "x") == doctest::Approx(0.35).epsilon(1e-12));
    CHECK(p(d, Dataset::OrBench, "o") == doctest::Approx(0.45).epsilon(1e-12));
    CHECK(p(d, Dataset::IF, "i") == doctest::Approx(0.20).epsilon(1e-12));
  }
  SUBCASE("boost 3 on one of two equal buckets") {
    const Pool pool = testsupport::make_pool(dir.path(), {{"IF", "a", 5}, {"IF", "b", 5}});
    DataAction a = action_with({0, 0, 1});
    a.bucket_weights[Dataset::IF] = {{"a", 0.5}, {"b", 0.5}};
    a.focus.push_back({"boost-a", {{"level", PredicateOp::Eq, "a"}}, 3.0, 1.0});
    const auto d = effective_distribution(a, pool);
    CHECK(p(d, Dataset::IF, "a") == doctest::Approx(0.75).epsilon(1e-12));
    CHECK(p(d, Dataset::IF, "b") == doctest::Approx(0.25).epsilon(1e-12));
    REQUIRE(d.focus.size() == 1);
    CHECK(d.focus[0].buckets.size() == 1);
  }
}

TEST_CASE("effective distribution is a probability vector") {
  TempDir dir;
  const Pool pool = load_pool(read_pool_manifest(testsupport::fixture("pool/manifest.json")));
  Rng rng(5);
  for (int trial = 0; trial < 200; ++trial) {
    DataAction a;
    double s = 0;
    for (auto& m : a.mixture) s += (m = rng.uniform());
    for (auto& m : a.mixture) m /= s;
    for (const auto& c : pool.catalogs()) {
      double t = 0;
      for (const auto& b : c.buckets) t += (a.bucket_weights[c.dataset][b.bucket_id] = rng.uniform() + 1e-3);
      for (auto& [_, w] : a.bucket_weights[c.dataset]) w /= t;
    }
    if (trial % 2) a.focus.push_back({"f", {{"complexity", PredicateOp::Eq, "HIGH"}}, 1.0 + 3 * rng.uniform(), 0.3});
    const auto d = effective_distribution(a, pool);
    double total = 0;
    for (const auto& [_, q] : d.probability) {
      CHECK(q >= 0.0);
      total += q;
    }
    CHECK(total == doctest::Approx(1.0).epsilon(1e-9));
  }
}

TEST_CASE("mass on a dataset with no live bucket is infeasible") {
  TempDir dir;
  const Pool pool = testsupport::make_pool(dir.path(), {{"XGUARD", "x", 5}});
  CHECK_THROWS_AS(effective_distribution(action_with({0.5, 0.5, 0}), pool), ConfigError);
  DataAction a = action_with({1, 0, 0});
  a.bucket_weights[Dataset::XGuard] = {{"x", 0.0}};
  CHECK_THROWS_AS(a.validate(), ConfigError);  // weights do not sum to 1
}

TEST_CASE("action validation") {
  CHECK_NOTHROW(action_with({0.5, 0.3, 0.2}).validate());
  CHECK_THROWS_AS(action_with({0.5, 0.3, 0.3}).validate(), ConfigError);
  CHECK_THROWS_AS(action_with({1.2, -0.2, 0}).validate(), ConfigError);
  DataAction a = action_with({1, 0, 0});
  a.focus.push_back({"f", {}, 0.5, 0.2});
  CHECK_THROWS_AS(a.validate(), ConfigError);
  a.focus[0] = {"f", {}, 2.0, 0.0};
  CHECK_THROWS_AS(a.validate(), ConfigError);
  DataAction b = action_with({1, 0, 0});
  b.bucket_weights[Dataset::XGuard] = {{"ghost", 1.0}};
  CHECK_NOTHROW(b.validate());
  CHECK_THROWS_AS(b.validate({BucketCatalog{Dataset::XGuard, {{"x", {}}}}}), ConfigError);
}

TEST_CASE("predicates") {
  TrainingWindow w{"w", Dataset::IF, "b1", 10, "", {{"complexity", "2"}, {"family", "LENGTH"}}};
  CHECK(TagPredicate{"dataset", PredicateOp::Eq, "IF"}.matches(w));
  CHECK(TagPredicate{"bucket", PredicateOp::Ne, "b2"}.matches(w));
  CHECK(TagPredicate{"complexity", PredicateOp::Ge, "2"}.matches(w));
  CHECK_FALSE(TagPredicate{"complexity", PredicateOp::Gt, "2"}.matches(w));
  CHECK(TagPredicate{"complexity", PredicateOp::Lt, "2.5"}.matches(w));
  CHECK_FALSE(TagPredicate{"family", PredicateOp::Lt, "3"}.matches(w));
  CHECK_FALSE(TagPredicate{"missing", PredicateOp::Eq, "x"}.matches(w));
  CHECK(TagPredicate{"missing", PredicateOp::Ne, "x"}.matches(w));
  FocusCriterion f{"f", {{"dataset", PredicateOp::Eq, "IF"}, {"family", PredicateOp::Eq, "FORMAT"}}, 2.0, 0.25};
  CHECK_FALSE(f.matches(w));
}

TEST_CASE("draw examples") {
  TempDir dir;
  SUBCASE("budget 100 with one 40-token window") {
    const Pool pool = testsupport::make_pool(dir.path(), {{"IF", "a", 40}});
    const auto m = draw_budgeted(effective_distribution(action_with({0, 0, 1}), pool), pool, 100, 1);
    CHECK(m.entries.size() == 2);
    CHECK(m.total_tokens == 80);
    CHECK(m.stop_reason == StopReason::Overflow);
    CHECK(m.overflow_tokens == 40);
  }
  SUBCASE("exact fit") {
    const Pool pool = testsupport::make_pool(dir.path(), {{"IF", "a", 40}});
    const auto m = draw_budgeted(effective_distribution(action_with({0, 0, 1}), pool), pool, 40, 1);
    CHECK(m.entries.size() == 1);
    CHECK(m.total_tokens == 40);
  }
  SUBCASE("budget below every window") {
    const Pool pool = testsupport::make_pool(dir.path(), {{"IF", "a", 40}});
    CHECK_THROWS_AS(draw_budgeted(effective_distribution(action_with({0, 0, 1}), pool), pool, 39, 1), DataError);
  }
}

TEST_CASE("draws are seed-deterministic") {
  const Pool pool = load_pool(read_pool_manifest(testsupport::fixture("pool/manifest.json")));
  DataAction a = action_with({0.5, 0.3, 0.2});
  a.focus.push_back({"f", {{"complexity", PredicateOp::Eq, "HIGH"}}, 2.0, 0.1});
  const auto d = effective_distribution(a, pool);
  const auto m1 = draw_budgeted(d, pool, 50000, 77);
  const auto m2 = draw_budgeted(d, pool, 50000, 77);
  const auto m3 = draw_budgeted(d, pool, 50000, 78);
  CHECK(m1.to_jsonl() == m2.to_jsonl());
  CHECK(m1.digest() == m2.digest());
  CHECK(m1.summary() == m2.summary());
  CHECK(m1.to_jsonl() != m3.to_jsonl());
}

TEST_CASE("focus cap bounds the boosted token share") {
  TempDir dir;
  const Pool pool = testsupport::make_pool(dir.path(), {{"IF", "hot", 10}, {"IF", "cold", 10}});
  DataAction a = action_with({0, 0, 1});
  a.bucket_weights[Dataset::IF] = {{"hot", 0.9}, {"cold", 0.1}};
  a.focus.push_back({"hot", {{"level", PredicateOp::Eq, "hot"}}, 4.0, 0.2});
  const auto m = draw_budgeted(effective_distribution(a, pool), pool, 10000, 3);
  REQUIRE(m.focus_tokens.size() == 1);
  CHECK(m.focus_tokens[0] <= 2000);
  CHECK(m.focus_tokens[0] == 2000);  // the hot bucket fills its cap before the budget runs out
  CHECK(m.bucket_tokens().at({Dataset::IF, "hot"}) == m.focus_tokens[0]);
  CHECK(m.total_tokens <= 10000);
  CHECK(m.total_tokens > 10000 - 10);
}

TEST_CASE("all buckets capped stops with CapExhausted") {
  TempDir dir;
  const Pool pool = testsupport::make_pool(dir.path(), {{"IF", "a", 10}});
  DataAction a = action_with({0, 0, 1});
  a.focus.push_back({"all", {{"dataset", PredicateOp::Eq, "IF"}}, 2.0, 0.5});
  const auto m = draw_budgeted(effective_distribution(a, pool), pool, 1000, 3);
  CHECK(m.stop_reason == StopReason::CapExhausted);
  CHECK(m.total_tokens == 500);
}

TEST_CASE("per-bucket draw counts pass a chi-square test at 0.01") {
  TempDir dir;
  const Pool pool = testsupport::make_pool(
      dir.path(), {{"XGUARD", "a", 10}, {"XGUARD", "b", 10}, {"ORBENCH", "c", 10}, {"IF", "d", 10}, {"IF", "e", 10}});
  DataAction a = action_with({0.5, 0.3, 0.2});
  a.bucket_weights[Dataset::XGuard] = {{"a", 0.8}, {"b", 0.2}};
  a.bucket_weights[Dataset::IF] = {{"d", 0.5}, {"e", 0.5}};
  const auto dist = effective_distribution(a, pool);
  for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
    const auto m = draw_budgeted(dist, pool, 50000, seed);
    const auto counts = m.bucket_tokens();
    const double n = static_cast<double>(m.entries.size());
    double stat = 0.0;
    for (const auto& [key, prob] : dist.probability) {
      const double observed = counts.contains(key) ? counts.at(key) / 10.0 : 0.0;
      const double expected = prob * n;
      stat += (observed - expected) * (observed - expected) / expected;
    }
    const boost::math::chi_squared chi(static_cast<double>(dist.probability.size() - 1));
    const double p_value = 1.0 - boost::math::cdf(chi, stat);
    CAPTURE(seed);
    CHECK(p_value > 0.01);
  }
}

TEST_CASE("token shares converge to (0.7, 0.3)") {
  TempDir dir;
  std::vector<DocSpec> docs;
  for (int i = 0; i < 20; ++i) docs.push_back({"XGUARD", i % 2 ? "a" : "b", 10});
  const Pool pool = testsupport::make_pool(dir.path(), docs);
  DataAction act = action_with({1, 0, 0});
  act.bucket_weights[Dataset::XGuard] = {{"a", 0.7}, {"b", 0.3}};
  const auto m = draw_budgeted(effective_distribution(act, pool), pool, 100000, 2024);
  const auto t = m.bucket_tokens();
  CHECK(m.total_tokens == 100000);
  CHECK(std::abs(t.at({Dataset::XGuard, "a"}) / 1e5 - 0.7) <= 0.02);
  CHECK(std::abs(t.at({Dataset::XGuard, "b"}) / 1e5 - 0.3) <= 0.02);
}

TEST_CASE("action JSON round-trip") {
  DataAction a = action_with({0.35, 0.45, 0.2});
  a.bucket_weights[Dataset::OrBench] = {{"o1", 0.25}, {"o2", 0.75}};
  a.focus.push_back({"BENIGN:x:GATED", {{"dataset", PredicateOp::Eq, "ORBENCH"}, {"complexity", PredicateOp::Ge, "2"}}, 2.0, 0.25});
  CHECK(action_from_json(to_json(a)) == a);
  const Json arr = {{"mixture", {0.5, 0.3, 0.2}}};
  CHECK(action_from_json(arr).mixture == std::array<double, 3>{0.5, 0.3, 0.2});
  CHECK_THROWS(action_from_json(Json{{"mixture", {0.5, 0.5}}}));
}
