#pragma once

#include "mixsearch/common.hpp"
#include "mixsearch/fixtures.hpp"
#include "mixsearch/io.hpp"
#include "mixsearch/random.hpp"
#include "mixsearch/rubric.hpp"
#include "mixsearch/sampler.hpp"

#include <array>
#include <cstdint>
#include <memory>
#include <string>
#include <vector>

namespace mixsearch {

/// Everything one trainer/evaluator call sees. Backends keep no state between
/// calls: every round starts from the same base model.
struct BackendRequest {
  /// kBaseRound for the untuned base point.
  int round_index = kBaseRound;
  DataAction action;
  /// Null for the base point.
  const SampleManifest* manifest = nullptr;
  /// Annotated evaluation samples per dimension.
  std::array<std::vector<PromptAnnotation>, 3> eval;
  std::uint64_t seed = 0;
};

/// Response-surface constants for the simulator. Indexed SAFE, BENIGN, IF.
///
///   mean_d = clip(base_d + gain_d * (1 - exp(-x_d / saturation_d))
///                 - sum_{d' != d} interference[d][d'] * x_{d'}, 1, 5)
///
/// where x_d is dataset d's token share of the manifest.
struct SurfaceParams {
  std::array<double, 3> base{2.76, 4.6667, 3.43};
  std::array<double, 3> gain{};
  std::array<double, 3> saturation{0.3, 0.3, 0.3};
  std::array<std::array<double, 3>, 3> interference{};
  /// Standard deviation of the per-slice offset.
  double slice_noise = 0.0;
  /// Standard deviation of per-sample scatter around the slice mean.
  double sample_spread = 1.0;

  void validate() const;
};

SurfaceParams surface_from_json(const Json& j);
Json to_json(const SurfaceParams& p);

/// Closed-form dimension means for given per-dataset token shares.
MetricVector surface_means(const std::array<double, 3>& token_share, const SurfaceParams& params);

/// Integer scores in [1, 5], one per target, summing exactly to `total`.
/// Starts from the rounded targets and nudges the samples with the largest
/// rounding residual first. Requires n <= total <= 5n.
std::vector<int> assign_scores(const std::vector<double>& targets, std::int64_t total);

/// Check vector consistent with an integer score: score 1 fails one floor
/// check, otherwise score - 1 of the four soft checks pass.
AtomicCheckVector synthesize_checks(Dimension d, int score, const SliceDescriptor& slice, Rng& rng);

/// Deterministic simulator round. Per-slice means are the dimension mean plus
/// seeded N(0, slice_noise) offsets; each slice's scores sum to
/// round(mean x count), so with zero noise a dimension mean equals its
/// surface value up to 1/count.
std::vector<EvalRecord> simulate_round(const BackendRequest& req, const SurfaceParams& params);

/// Pre-scored records whose per-dimension means equal the fixture row at 4
/// decimals. Per-slice detail is synthetic. Throws BackendError for a missing
/// round and FixtureError when eval_size cannot represent a row mean.
std::vector<EvalRecord> replay_round(const ReplayFixture& fixture, int round_index);

class Backend {
 public:
  virtual ~Backend() = default;
  virtual std::string name() const = 0;
  /// Written into round metadata so synthetic records are labelled.
  virtual std::string record_origin() const = 0;
  virtual std::vector<EvalRecord> evaluate(const BackendRequest& req) const = 0;
};

class SimulatorBackend final : public Backend {
 public:
  explicit SimulatorBackend(SurfaceParams params);
  std::string name() const override { return "simulator"; }
  std::string record_origin() const override { return "simulated"; }
  std::vector<EvalRecord> evaluate(const BackendRequest& req) const override { return simulate_round(req, params_); }

 private:
  SurfaceParams params_;
};

class ReplayBackend final : public Backend {
 public:
  explicit ReplayBackend(ReplayFixture fixture) : fixture_(std::move(fixture)) {}
  std::string name() const override { return "replay"; }
  std::string record_origin() const override { return "replay-synthetic-slices"; }
  std::vector<EvalRecord> evaluate(const BackendRequest& req) const override {
    return replay_round(fixture_, req.round_index);
  }
  const ReplayFixture& fixture() const { return fixture_; }

 private:
  ReplayFixture fixture_;
};

/// Slot for a real fine-tuning driver. Interface only: evaluate() throws.
class ExternalBackend final : public Backend {
 public:
  explicit ExternalBackend(std::string command) : command_(std::move(command)) {}
  std::string name() const override { return "external"; }
  std::string record_origin() const override { return "external"; }
  std::vector<EvalRecord> evaluate(const BackendRequest& req) const override;

 private:
  std::string command_;
};

}  // namespace mixsearch
