#include "mixsearch/profile.hpp"

#include <doctest.h>
#include <fmt/format.h>

using namespace mixsearch;

namespace {

EvalRecord rec(Dimension d, const std::string& slice, double score, bool valid = true, double weight = 1.0) {
  EvalRecord r;
  r.sample_id = fmt::format("{}-{}-{}", to_string(d), slice, score);
  r.dimension = d;
  r.valid = valid;
  r.slice = {{"s", slice}};
  r.weight = weight;
  r.score = score;
  r.checks.dimension = d;
  r.checks.checks.push_back({"c", score >= 3.0, CheckRole::Soft, 1.0, ""});
  r.l2_state = score >= 3.0 ? L2State::Full : L2State::Partial;
  return r;
}

}  // namespace

TEST_CASE("metric vector is the unweighted mean of valid records") {
  const std::vector<EvalRecord> rs = {
      rec(Dimension::Safe, "a", 1.0, true, 5.0), rec(Dimension::Safe, "b", 5.0),   rec(Dimension::Safe, "a", 2.0, false),
      rec(Dimension::Benign, "a", 3.0),          rec(Dimension::IF, "a", 4.0),     rec(Dimension::IF, "a", 4.5),
  };
  const MetricVector m = metric_vector(rs);
  CHECK(m[Dimension::Safe] == 3.0);
  CHECK(m[Dimension::Benign] == 3.0);
  CHECK(m[Dimension::IF] == 4.25);
}

TEST_CASE("metric is undefined when a dimension has no valid record") {
  const std::vector<EvalRecord> rs = {rec(Dimension::Safe, "a", 1.0), rec(Dimension::IF, "a", 4.0),
                                      rec(Dimension::Benign, "a", 2.0, false)};
  try {
    metric_vector(rs);
    FAIL("expected an error");
  } catch (const DataError& e) {
    CHECK(std::string(e.what()).find("BENIGN") != std::string::npos);
  }
}

TEST_CASE("failure profiles") {
  const std::vector<EvalRecord> rs = {
      rec(Dimension::Safe, "a", 1.0, true, 2.0), rec(Dimension::Safe, "a", 2.0, true, 2.0),
      rec(Dimension::Safe, "a", 5.0, true, 2.0), rec(Dimension::Safe, "b", 2.5),
      rec(Dimension::Safe, "b", 4.0),            rec(Dimension::Safe, "b", 1.0, false),
  };
  const auto ps = build_failure_profiles(rs);
  REQUIRE(ps.size() == 2);
  const auto& a = ps[0];
  CHECK(a.slice_key() == "s=a");
  CHECK(a.sample_count == 3);
  CHECK(a.failed_count == 2);
  CHECK(a.fail_rate == doctest::Approx(2.0 / 3.0));
  CHECK(a.mean_score == doctest::Approx(8.0 / 3.0));
  CHECK(a.weight_mass == 6.0);
  CHECK(a.fail_mass() == doctest::Approx(4.0));
  CHECK(a.breakdown.at("PARTIAL") == 2);
  CHECK(a.breakdown.at("c") == 2);
  const auto& b = ps[1];
  CHECK(b.sample_count == 2);
  CHECK(b.fail_rate == 0.5);

  // threshold is strict: a 3.0 score is not a failure, 2.9999 is
  const std::vector<EvalRecord> edge = {rec(Dimension::IF, "x", 3.0), rec(Dimension::IF, "x", 2.9999)};
  CHECK(build_failure_profiles(edge)[0].failed_count == 1);
  CHECK(build_failure_profiles(edge, 5.0)[0].failed_count == 2);
}

TEST_CASE("ranking policies") {
  const std::vector<EvalRecord> rs = {
      rec(Dimension::Safe, "heavy", 1.0, true, 4.0), rec(Dimension::Safe, "heavy", 4.0, true, 4.0),
      rec(Dimension::Safe, "light", 1.0),            rec(Dimension::Safe, "tie", 2.0),
  };
  const auto ps = build_failure_profiles(rs);
  const auto by_mass = rank_slices(ps);
  CHECK(by_mass[0].slice_key() == "s=heavy");
  const auto by_rate = rank_slices(ps, RankingPolicy::FailRate);
  // light and tie both fail at rate 1; lower mean wins
  CHECK(by_rate[0].slice_key() == "s=light");
  CHECK(by_rate[1].slice_key() == "s=tie");
  CHECK(by_rate[2].slice_key() == "s=heavy");
}

TEST_CASE("profile and metric JSON round-trip") {
  const std::vector<EvalRecord> rs = {rec(Dimension::Benign, "a", 1.0), rec(Dimension::Benign, "a", 4.0)};
  const auto p = build_failure_profiles(rs)[0];
  const auto q = profile_from_json(to_json(p));
  CHECK(q.slice == p.slice);
  CHECK(q.breakdown == p.breakdown);
  CHECK(q.fail_rate == p.fail_rate);
  const MetricVector m{{2.76, 4.6667, 3.43}};
  CHECK(metric_from_json(to_json(m)) == m);
}
