#include "mixsearch/fixtures.hpp"

#include "mixsearch/pareto.hpp"
#include "mixsearch/profile.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <set>

namespace mixsearch {

const ReplayRow* ReplayFixture::find(int round) const {
  for (const auto& r : rows) {
    if (r.round == round) return &r;
  }
  return nullptr;
}

int ReplayFixture::round_count() const {
  return static_cast<int>(std::count_if(rows.begin(), rows.end(), [](const ReplayRow& r) { return r.round != kBaseRound; }));
}

DataAction ReplayFixture::action(int round) const {
  const ReplayRow* row = find(round);
  if (row == nullptr || !row->mixture) throw BackendError(fmt::format("replay gap: fixture has no action for round {}", round));
  DataAction a;
  a.mixture = *row->mixture;
  a.bucket_weights = row->bucket_weights;
  if (a.bucket_weights.empty()) a.bucket_weights = uniform_bucket_weights(catalogs);
  a.focus = row->focus;
  return a;
}

ReplayFixture ReplayFixture::from_json(const Json& j) {
  ReplayFixture f;
  try {
    f.eval_size = j.value("eval_size", std::size_t{300});
    if (f.eval_size == 0) throw DataError("replay fixture eval_size must be positive");
    f.seed = j.value("seed", std::uint64_t{0});
    f.provenance = j.value("provenance", "");
    if (j.contains("slices")) {
      for (const auto& [dim, list] : j.at("slices").items()) {
        f.slices[parse_dimension(dim)] = list.get<std::vector<SliceDescriptor>>();
      }
    }
    if (j.contains("buckets")) {
      for (const auto& [ds, list] : j.at("buckets").items()) {
        BucketCatalog c{parse_dataset(ds), {}};
        for (const auto& b : list) c.buckets.push_back({b.at("id").get<std::string>(), b.at("slice").get<SliceDescriptor>()});
        f.catalogs.push_back(std::move(c));
      }
    }
    for (const auto& r : j.at("rows")) {
      ReplayRow row;
      row.label = r.at("label").get<std::string>();
      row.round = r.at("round").get<int>();
      row.metrics = metric_from_json(r.at("metrics"));
      if (r.contains("mixture")) {
        const auto m = r.at("mixture").get<std::vector<double>>();
        if (m.size() != 3) throw DataError(fmt::format("row '{}': mixture needs 3 entries", row.label));
        row.mixture = std::array<double, 3>{m[0], m[1], m[2]};
      }
      if (r.contains("bucket_weights")) {
        for (const auto& [ds, w] : r.at("bucket_weights").items()) {
          row.bucket_weights[parse_dataset(ds)] = w.get<std::map<std::string, double>>();
        }
      }
      if (r.contains("focus")) {
        for (const auto& fj : r.at("focus")) row.focus.push_back(focus_from_json(fj));
      }
      if (r.contains("slice_means")) {
        for (const auto& [dim, means] : r.at("slice_means").items()) {
          row.slice_means[parse_dimension(dim)] = means.get<std::map<std::string, double>>();
        }
      }
      f.rows.push_back(std::move(row));
    }
  } catch (const Json::exception& e) {
    throw FixtureError(fmt::format("malformed replay fixture: {}", e.what()));
  }
  return f;
}

ReplayFixture ReplayFixture::load(const std::filesystem::path& path) { return from_json(read_json_file(path)); }

FixtureVerdict validate_fixture(const ReplayFixture& fixture) {
  FixtureVerdict v;
  auto fail = [&](std::string msg) {
    v.pass = false;
    v.problems.push_back(std::move(msg));
  };

  std::set<int> rounds;
  std::set<std::string> labels;
  for (const auto& r : fixture.rows) {
    if (!rounds.insert(r.round).second) fail(fmt::format("row '{}': duplicate round {}", r.label, r.round));
    if (!labels.insert(r.label).second) fail(fmt::format("row '{}': duplicate label", r.label));
    if (r.round != kBaseRound && !r.mixture) fail(fmt::format("row '{}': missing mixture", r.label));
    for (Dimension d : kAllDimensions) {
      if (!(r.metrics[d] >= 1.0 && r.metrics[d] <= 5.0)) {
        fail(fmt::format("row '{}': {} = {} outside [1, 5]", r.label, to_string(d), r.metrics[d]));
      }
    }
  }
  const std::set<int> expected_rounds{kBaseRound, 0, 1, 2, 3, 4};
  if (rounds != expected_rounds) {
    for (int r : expected_rounds) {
      if (!rounds.contains(r)) fail(fmt::format("structural: missing row for round {}", r));
    }
    if (fixture.rows.size() != expected_rounds.size()) {
      fail(fmt::format("structural: {} rows, expected {}", fixture.rows.size(), expected_rounds.size()));
    }
    return v;
  }

  // Recompute the non-dominated set by pairwise enumeration.
  std::set<std::string> front;
  for (const auto& a : fixture.rows) {
    const bool dominated = std::any_of(fixture.rows.begin(), fixture.rows.end(),
                                       [&](const ReplayRow& b) { return dominates(b.metrics, a.metrics); });
    if (!dominated) front.insert(a.label);
  }
  const std::set<std::string> expected_front{fixture.find(kBaseRound)->label, fixture.find(2)->label, fixture.find(4)->label};
  for (const auto& label : expected_front) {
    if (!front.contains(label)) fail(fmt::format("row '{}' is missing from the non-dominated set", label));
  }
  for (const auto& label : front) {
    if (!expected_front.contains(label)) fail(fmt::format("row '{}' is unexpectedly non-dominated", label));
  }

  const auto& m2 = fixture.find(2)->mixture;
  for (int r : {3, 4}) {
    const auto* row = fixture.find(r);
    if (row->mixture && m2 && *row->mixture != *m2) {
      fail(fmt::format("row '{}': mixture differs from round 2", row->label));
    }
  }
  return v;
}

void require_valid_fixture(const ReplayFixture& fixture) {
  const auto v = validate_fixture(fixture);
  if (!v.pass) throw FixtureError(fmt::format("fixture corruption: {}", v.problems.front()));
}

}  // namespace mixsearch
