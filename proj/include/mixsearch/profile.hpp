#pragma once

#include "mixsearch/common.hpp"
#include "mixsearch/io.hpp"
#include "mixsearch/rubric.hpp"

#include <cstdint>
#include <map>
#include <span>
#include <string>
#include <vector>

namespace mixsearch {

inline constexpr double kDefaultFailThreshold = 3.0;

/// Per-slice failure profile: how badly the slice scores, how often it fails,
/// and which modes (check ids and L2 states) the failures fired.
struct FailureProfile {
  Dimension dimension = Dimension::Safe;
  SliceDescriptor slice;
  double mean_score = 0.0;
  double fail_rate = 0.0;
  std::map<std::string, std::int64_t> breakdown;
  std::uint64_t sample_count = 0;
  std::uint64_t failed_count = 0;
  /// Sum of annotation weights.
  double weight_mass = 0.0;
  /// Diagnostic only; the headline metric is unweighted.
  double weighted_mean = 0.0;

  double fail_mass() const { return fail_rate * weight_mass; }
  std::string slice_key() const { return slice_id(slice); }
};

/// Unweighted mean score of valid records per dimension. Throws DataError
/// naming the dimension when it has no valid record.
MetricVector metric_vector(std::span<const EvalRecord> records);

/// Groups valid records by (dimension, slice). A record fails when its score
/// is below `fail_threshold`; each failure adds its L2 state and every failed
/// check id to the breakdown. Output is ordered by (dimension, slice id).
std::vector<FailureProfile> build_failure_profiles(std::span<const EvalRecord> records,
                                                   double fail_threshold = kDefaultFailThreshold);

enum class RankingPolicy {
  /// fail_rate x weight_mass
  FailMass,
  /// fail_rate alone, ignoring weights
  FailRate,
};

/// Orders slices by descending priority, then ascending mean score, then slice id.
std::vector<FailureProfile> rank_slices(std::span<const FailureProfile> profiles,
                                        RankingPolicy policy = RankingPolicy::FailMass);

Json to_json(const FailureProfile& p);
FailureProfile profile_from_json(const Json& j);
Json to_json(const MetricVector& m);
MetricVector metric_from_json(const Json& j);

}  // namespace mixsearch
