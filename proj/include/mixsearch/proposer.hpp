#pragma once

#include "mixsearch/common.hpp"
#include "mixsearch/corpus.hpp"
#include "mixsearch/io.hpp"
#include "mixsearch/profile.hpp"
#include "mixsearch/sampler.hpp"

#include <array>
#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace mixsearch {

/// Immutable audit of one completed round.
struct RoundRecord {
  int round_index = 0;
  DataAction action;
  MetricVector metric;
  std::vector<FailureProfile> profiles;
  std::string manifest_digest;
  std::uint64_t seed = 0;
};

/// Append-only round log plus the base (untuned) metric, if evaluated.
class RoundHistory {
 public:
  RoundHistory() = default;
  explicit RoundHistory(std::optional<MetricVector> base) : base_(std::move(base)) {}

  /// Throws ContractError unless record.round_index == size().
  void append(RoundRecord record);

  const std::optional<MetricVector>& base() const { return base_; }
  const std::vector<RoundRecord>& rounds() const { return rounds_; }
  std::size_t size() const { return rounds_.size(); }
  bool empty() const { return rounds_.empty(); }
  const RoundRecord& latest() const;
  /// Metric before the latest round: the previous round, else the base point.
  std::optional<MetricVector> previous_metric() const;

 private:
  std::optional<MetricVector> base_;
  std::vector<RoundRecord> rounds_;
};

struct PolicyConfig {
  /// Per dimension (SAFE, BENIGN, IF).
  std::array<double, 3> target{4.5, 4.5, 4.0};
  double max_ratio_step = 0.10;
  double dataset_floor = 0.10;
  double focus_cap = 0.25;
  double regression_guard = 0.15;
  double focus_boost = 2.0;
  /// Bucket-weight smoothing as a fraction of the dataset's total fail mass.
  double smoothing_fraction = 0.01;

  /// Throws ConfigError on infeasible floors or non-positive steps.
  void validate() const;
};

PolicyConfig policy_from_json(const Json& j);
Json to_json(const PolicyConfig& c);

struct RationaleEntry {
  std::string rule;
  std::string detail;
};

struct Proposal {
  DataAction action;
  std::vector<RationaleEntry> rationale;

  Json rationale_json(std::string_view policy_name) const;
};

/// Pluggable decision procedure mapping history to the next action.
class ProposalPolicy {
 public:
  virtual ~ProposalPolicy() = default;
  virtual std::string name() const = 0;
  virtual Proposal propose(const RoundHistory& history, const std::vector<BucketCatalog>& catalogs) const = 0;
};

/// Auditable decision table:
///  1. Move up to max_ratio_step of mixture mass toward the dataset with the
///     largest positive deficit (target - metric). Donors give in proportion to
///     their surplus relative to the receiver, equally when none has one, and
///     never below the floor.
///  2. If the latest round dropped a dimension by more than regression_guard,
///     step 1 is skipped and half of that round's mixture move is undone. When
///     the round had no predecessor action, max_ratio_step moves from the most
///     improved dimension's dataset to the regressed one.
///  3. Bucket weights within each dataset follow fail_mass + smoothing of the
///     matching slice.
///  4. One focus criterion per below-target dimension on the worst slice's top
///     failure mode, dropped if it was active while its dimension regressed.
class RuleBasedPolicy final : public ProposalPolicy {
 public:
  explicit RuleBasedPolicy(PolicyConfig config);
  std::string name() const override { return "rule_based"; }
  Proposal propose(const RoundHistory& history, const std::vector<BucketCatalog>& catalogs) const override;

 private:
  PolicyConfig config_;
};

/// Convenience wrapper over RuleBasedPolicy. Throws ContractError on an empty
/// history.
Proposal propose(const RoundHistory& history, const PolicyConfig& config, const std::vector<BucketCatalog>& catalogs);

}  // namespace mixsearch
