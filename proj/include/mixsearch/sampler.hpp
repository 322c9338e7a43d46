#pragma once

#include "mixsearch/common.hpp"
#include "mixsearch/corpus.hpp"
#include "mixsearch/io.hpp"

#include <array>
#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <vector>

namespace mixsearch {

enum class PredicateOp { Eq, Ne, Lt, Le, Gt, Ge };

/// One test over a window tag. The pseudo-tags "dataset" and "bucket" address
/// the window's own fields. Ordering ops compare numerically and are false for
/// non-numeric values.
struct TagPredicate {
  std::string key;
  PredicateOp op = PredicateOp::Eq;
  std::string value;

  bool matches(const TrainingWindow& w) const;
  bool operator==(const TagPredicate&) const = default;
};

/// Conjunction of tag predicates that boosts matching buckets for a capped
/// share of the budget.
struct FocusCriterion {
  std::string label;
  std::vector<TagPredicate> predicate;
  double boost = 2.0;
  double cap_fraction = 0.25;

  bool matches(const TrainingWindow& w) const;
  bool operator==(const FocusCriterion&) const = default;
};

/// One round's decision: dataset mixture, per-dataset bucket weights, focus.
struct DataAction {
  /// Order XGUARD, ORBENCH, IF.
  std::array<double, 3> mixture{};
  std::map<Dataset, std::map<std::string, double>> bucket_weights;
  std::vector<FocusCriterion> focus;

  /// Simplex checks within 1e-9, boost >= 1, cap in (0, 1]. Throws ConfigError.
  void validate() const;
  /// validate() plus every referenced bucket exists in `catalogs`.
  void validate(const std::vector<BucketCatalog>& catalogs) const;

  bool operator==(const DataAction&) const = default;
};

inline constexpr double kSimplexTolerance = 1e-9;

/// Uniform bucket weights for every bucket of every catalog.
std::map<Dataset, std::map<std::string, double>> uniform_bucket_weights(const std::vector<BucketCatalog>& catalogs);

struct FocusBuckets {
  std::string label;
  double cap_fraction = 1.0;
  std::set<BucketKey> buckets;
};

/// Per-bucket sampling probabilities plus the buckets each focus criterion boosted.
struct BucketDistribution {
  std::map<BucketKey, double> probability;
  std::vector<FocusBuckets> focus;
};

/// mixture[dataset] x bucket_weight, times the boost of each criterion that
/// every window of the bucket satisfies, renormalized to sum to 1.
BucketDistribution effective_distribution(const DataAction& action, const Pool& pool);

enum class StopReason { Overflow, CapExhausted };

struct ManifestEntry {
  std::size_t window_index = 0;
  std::string window_id;
  Dataset dataset = Dataset::XGuard;
  std::string bucket_id;
  std::uint64_t token_count = 0;
};

struct SampleManifest {
  std::vector<ManifestEntry> entries;
  std::uint64_t total_tokens = 0;
  std::uint64_t budget_tokens = 0;
  std::uint64_t seed = 0;
  std::map<BucketKey, double> effective_distribution;
  StopReason stop_reason = StopReason::Overflow;
  /// Size of the discarded draw that triggered an Overflow stop.
  std::uint64_t overflow_tokens = 0;
  std::uint64_t cap_rejections = 0;
  /// Tokens admitted under each focus criterion, parallel to BucketDistribution::focus.
  std::vector<std::uint64_t> focus_tokens;

  std::array<std::uint64_t, 3> dataset_tokens() const;
  std::map<BucketKey, std::uint64_t> bucket_tokens() const;

  /// {window_id, dataset, bucket, token_count} per line.
  std::string to_jsonl() const;
  Json summary() const;
  /// SHA-256 of to_jsonl().
  std::string digest() const;
};

/// Draws buckets i.i.d. from `dist` and windows uniformly with replacement
/// until a draw would overflow `budget_tokens`; that draw is discarded.
///
/// Draws from a focus-boosted bucket are rejected once the criterion's token
/// share would pass floor(cap_fraction x budget). A bucket whose smallest
/// window can no longer fit under its caps is closed and the distribution is
/// renormalized over the open buckets; when none remain the draw stops with
/// CapExhausted.
SampleManifest draw_budgeted(const BucketDistribution& dist, const Pool& pool, std::uint64_t budget_tokens,
                             std::uint64_t seed);

Json to_json(const DataAction& action);
DataAction action_from_json(const Json& j);
Json to_json(const FocusCriterion& c);
FocusCriterion focus_from_json(const Json& j);
std::string_view to_string(StopReason r);

}  // namespace mixsearch
