#include "mixsearch/fixtures.hpp"
#include "mixsearch/random.hpp"

#include "support.hpp"

#include <doctest.h>

using namespace mixsearch;

namespace {

ReplayFixture shipped() { return ReplayFixture::load(testsupport::fixture("replay_trajectory.json")); }

ReplayRow& row(ReplayFixture& fx, int round) { return *const_cast<ReplayRow*>(fx.find(round)); }

bool mentions(const FixtureVerdict& v, const std::string& what) {
  for (const auto& p : v.problems) {
    if (p.find(what) != std::string::npos) return true;
  }
  return false;
}

}  // namespace

TEST_CASE("shipped fixture bytes are pinned") {
  CHECK(sha256_hex(read_text_file(testsupport::fixture("replay_trajectory.json"))) == testsupport::kReplayFixtureSha256);
}

TEST_CASE("shipped fixture carries the published trajectory") {
  const ReplayFixture fx = shipped();
  CHECK(fx.rows.size() == 6);
  CHECK(fx.round_count() == 5);
  CHECK(fx.eval_size == 300);
  const std::vector<std::pair<int, std::array<double, 3>>> metrics = {
      {kBaseRound, {2.7600, 4.6667, 3.4300}}, {0, {3.2267, 3.6433, 3.5300}}, {1, {3.3867, 3.8033, 3.5700}},
      {2, {4.4567, 4.3300, 3.7033}},          {3, {3.9700, 4.2967, 3.5767}}, {4, {4.6700, 4.4067, 3.6533}},
  };
  for (const auto& [r, m] : metrics) {
    CAPTURE(r);
    REQUIRE(fx.find(r) != nullptr);
    CHECK(FixedMetric::from(fx.find(r)->metrics) == FixedMetric::from(MetricVector{m}));
  }
  CHECK(fx.find(kBaseRound)->label == "Base");
  CHECK_FALSE(fx.find(kBaseRound)->mixture.has_value());
  CHECK(*fx.find(0)->mixture == std::array<double, 3>{0.50, 0.30, 0.20});
  CHECK(*fx.find(1)->mixture == std::array<double, 3>{0.40, 0.40, 0.20});
  for (int r : {2, 3, 4}) CHECK(*fx.find(r)->mixture == std::array<double, 3>{0.35, 0.45, 0.20});
  CHECK(fx.find(2)->bucket_weights != fx.find(3)->bucket_weights);
  CHECK(fx.find(3)->bucket_weights != fx.find(4)->bucket_weights);
  for (int r = 0; r < 5; ++r) CHECK_NOTHROW(fx.action(r).validate(fx.catalogs));
  CHECK_THROWS_AS(fx.action(5), BackendError);
}

TEST_CASE("shipped fixture validates") {
  const auto v = validate_fixture(shipped());
  CHECK(v.pass);
  CHECK(v.problems.empty());
}

TEST_CASE("a metric change that alters the front is reported with the row") {
  ReplayFixture fx = shipped();
  row(fx, 3).metrics = MetricVector{{4.5, 4.4, 3.71}};  // now dominates Iter 2
  const auto v = validate_fixture(fx);
  CHECK_FALSE(v.pass);
  CHECK(mentions(v, "Iter 2"));
  CHECK(mentions(v, "Iter 3"));
  CHECK_THROWS_AS(require_valid_fixture(fx), FixtureError);
}

TEST_CASE("a missing row is structural") {
  ReplayFixture fx = shipped();
  fx.rows.erase(fx.rows.begin() + 2);
  const auto v = validate_fixture(fx);
  CHECK_FALSE(v.pass);
  CHECK(mentions(v, "structural"));
}

TEST_CASE("a mixture that breaks the fixed-macro rounds is reported") {
  ReplayFixture fx = shipped();
  row(fx, 3).mixture = std::array<double, 3>{0.4, 0.4, 0.2};
  const auto v = validate_fixture(fx);
  CHECK_FALSE(v.pass);
  CHECK(mentions(v, "mixture"));
}

TEST_CASE("out-of-range metrics and duplicate labels") {
  ReplayFixture fx = shipped();
  row(fx, 1).metrics[Dimension::IF] = 5.5;
  row(fx, 4).label = "Iter 3";
  const auto v = validate_fixture(fx);
  CHECK_FALSE(v.pass);
  CHECK(mentions(v, "outside [1, 5]"));
  CHECK(mentions(v, "duplicate label"));
}

TEST_CASE("malformed fixture files are fixture errors") {
  testsupport::TempDir dir;
  write_file_atomic(dir / "bad.json", "{\"rows\": 3}");
  CHECK_THROWS_AS(ReplayFixture::load(dir / "bad.json"), FixtureError);
  CHECK_THROWS_AS(ReplayFixture::load(dir / "absent.json"), DataError);
}
