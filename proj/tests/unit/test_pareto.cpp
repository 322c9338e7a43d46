#include "mixsearch/pareto.hpp"

#include "support.hpp"

#include <doctest.h>

#include <algorithm>
#include <numeric>
#include <random>

using namespace mixsearch;

namespace {

const std::vector<std::pair<std::string, MetricVector>> kTable = {
    {"Base", {{2.7600, 4.6667, 3.4300}}},   {"Iter 0", {{3.2267, 3.6433, 3.5300}}},
    {"Iter 1", {{3.3867, 3.8033, 3.5700}}}, {"Iter 2", {{4.4567, 4.3300, 3.7033}}},
    {"Iter 3", {{3.9700, 4.2967, 3.5767}}}, {"Iter 4", {{4.6700, 4.4067, 3.6533}}},
};

std::vector<std::string> labels(const ParetoArchive& a) {
  std::vector<std::string> out;
  for (const auto& e : a.entries()) out.push_back(e.label);
  return out;
}

}  // namespace

TEST_CASE("dominance is exact on ticks") {
  CHECK(dominates(MetricVector{{1, 1, 1.0001}}, MetricVector{{1, 1, 1}}));
  CHECK_FALSE(dominates(MetricVector{{1, 1, 1}}, MetricVector{{1, 1, 1}}));
  CHECK_FALSE(dominates(MetricVector{{1, 1, 1.00004}}, MetricVector{{1, 1, 1}}));
  CHECK_FALSE(dominates(MetricVector{{2, 0, 1}}, MetricVector{{1, 1, 1}}));
}

TEST_CASE("dominating pairs match the oracle") {
  const Json oracle = read_json_file(testsupport::fixture("oracles/expected/dominance.json"));
  std::vector<std::pair<std::string, std::string>> pairs;
  for (const auto& [a, ma] : kTable) {
    for (const auto& [b, mb] : kTable) {
      if (dominates(ma, mb)) pairs.emplace_back(a, b);
    }
  }
  std::vector<std::pair<std::string, std::string>> expected;
  for (const auto& p : oracle["dominating_pairs"]) expected.emplace_back(p[0], p[1]);
  std::sort(pairs.begin(), pairs.end());
  std::sort(expected.begin(), expected.end());
  CHECK(pairs == expected);
}

TEST_CASE("archive keeps Base, Iter 2, Iter 4 in every insertion order") {
  std::vector<std::size_t> order(kTable.size());
  std::iota(order.begin(), order.end(), 0);
  int orders = 0;
  do {
    ParetoArchive a;
    for (std::size_t i : order) a.insert(kTable[i].first, kTable[i].second);
    auto got = labels(a);
    std::sort(got.begin(), got.end());
    REQUIRE(got == std::vector<std::string>{"Base", "Iter 2", "Iter 4"});
    for (const auto& x : a.entries()) {
      for (const auto& y : a.entries()) CHECK_FALSE(dominates(x.metric, y.metric));
    }
    ++orders;
  } while (std::next_permutation(order.begin(), order.end()));
  CHECK(orders == 720);
}

TEST_CASE("insert verdicts in round order") {
  ParetoArchive a;
  CHECK(a.insert("Base", kTable[0].second).verdict == Verdict::Accepted);
  CHECK(a.insert("Iter 0", kTable[1].second).verdict == Verdict::Accepted);
  const auto r1 = a.insert("Iter 1", kTable[2].second);
  CHECK(r1.verdict == Verdict::Replaces);
  CHECK(r1.replaced == std::vector<std::string>{"Iter 0"});
  CHECK(a.insert("Iter 2", kTable[3].second).verdict == Verdict::Replaces);
  CHECK(a.insert("Iter 3", kTable[4].second).verdict == Verdict::Dominated);
  CHECK(a.insert("Iter 4", kTable[5].second).verdict == Verdict::Accepted);
  CHECK(labels(a) == std::vector<std::string>{"Base", "Iter 2", "Iter 4"});
  CHECK(a.history().size() == 6);
  CHECK_THROWS_AS(a.insert("Base", kTable[0].second), ContractError);
}

TEST_CASE("equal metrics are both kept") {
  ParetoArchive a;
  a.insert("x", MetricVector{{1, 2, 3}});
  CHECK(a.insert("y", MetricVector{{1, 2, 3}}).verdict == Verdict::Accepted);
  CHECK(a.entries().size() == 2);
}

TEST_CASE("snapshot round-trip") {
  ParetoArchive a;
  for (const auto& [l, m] : kTable) a.insert(l, m);
  const ParetoArchive b = ParetoArchive::from_snapshot(a.snapshot());
  CHECK(labels(b) == labels(a));
  CHECK(b.snapshot() == a.snapshot());
  CHECK(b.contains("Iter 2"));
  CHECK_FALSE(b.contains("Iter 3"));
  CHECK_THROWS_AS(ParetoArchive::from_snapshot(Json{{"history", 3}}), DataError);
}

TEST_CASE("random archives stay mutually non-dominated") {
  std::mt19937_64 gen(3);
  std::uniform_int_distribution<int> tick(10000, 10020);
  for (int trial = 0; trial < 200; ++trial) {
    ParetoArchive a;
    std::vector<MetricVector> all;
    for (int i = 0; i < 30; ++i) {
      MetricVector m{{tick(gen) / 1e4, tick(gen) / 1e4, tick(gen) / 1e4}};
      all.push_back(m);
      a.insert(fmt::format("m{}", i), m);
    }
    for (const auto& e : a.entries()) {
      for (const auto& m : all) REQUIRE_FALSE(dominates(FixedMetric::from(m), e.metric));
    }
    for (const auto& m : all) {
      const bool kept_or_dominated = std::any_of(a.entries().begin(), a.entries().end(), [&](const auto& e) {
        return e.metric == FixedMetric::from(m) || dominates(e.metric, FixedMetric::from(m));
      });
      REQUIRE(kept_or_dominated);
    }
  }
}
