#pragma once

#include "mixsearch/common.hpp"
#include "mixsearch/corpus.hpp"
#include "mixsearch/io.hpp"
#include "mixsearch/sampler.hpp"

#include <filesystem>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace mixsearch {

/// Round index used for the untuned base point.
inline constexpr int kBaseRound = -1;

struct ReplayRow {
  std::string label;
  int round = kBaseRound;
  MetricVector metrics;
  /// Absent for the base row.
  std::optional<std::array<double, 3>> mixture;
  std::map<Dataset, std::map<std::string, double>> bucket_weights;
  std::vector<FocusCriterion> focus;
  /// Optional per-slice mean targets, keyed by slice id.
  std::map<Dimension, std::map<std::string, double>> slice_means;
};

/// Recorded search trajectory: base row plus one row per round.
struct ReplayFixture {
  std::vector<ReplayRow> rows;
  /// Synthetic evaluation samples per dimension; means are multiples of 1/eval_size.
  std::size_t eval_size = 300;
  std::map<Dimension, std::vector<SliceDescriptor>> slices;
  std::vector<BucketCatalog> catalogs;
  std::uint64_t seed = 0;
  std::string provenance;

  const ReplayRow* find(int round) const;
  /// Number of non-base rows.
  int round_count() const;
  /// Action recorded for `round`; throws BackendError when missing.
  DataAction action(int round) const;

  static ReplayFixture from_json(const Json& j);
  static ReplayFixture load(const std::filesystem::path& path);
};

struct FixtureVerdict {
  bool pass = true;
  std::vector<std::string> problems;
};

/// Cross-checks the search-history fixture: six rows (base, rounds 0-4), a
/// non-dominated set of exactly {Base, Iter 2, Iter 4}, and one shared mixture
/// for rounds 2-4.
FixtureVerdict validate_fixture(const ReplayFixture& fixture);

/// validate_fixture, throwing FixtureError with the first problem.
void require_valid_fixture(const ReplayFixture& fixture);

}  // namespace mixsearch
