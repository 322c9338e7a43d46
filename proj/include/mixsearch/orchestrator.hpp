#pragma once

#include "mixsearch/backend.hpp"
#include "mixsearch/common.hpp"
#include "mixsearch/io.hpp"
#include "mixsearch/proposer.hpp"
#include "mixsearch/sampler.hpp"

#include <array>
#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace mixsearch {

enum class BackendKind { Simulator, Replay, External };

std::string_view to_string(BackendKind k);

/// Everything a closed-loop run depends on. Paths are resolved relative to
/// the config file when loaded from disk.
struct LoopConfig {
  std::uint64_t budget_tokens = 1'000'000;
  int rounds = 5;
  std::uint64_t master_seed = 0;
  std::filesystem::path pool_manifest;
  std::filesystem::path taxonomy;
  /// Per dimension (SAFE, BENIGN, IF).
  std::array<std::filesystem::path, 3> eval_sets;
  /// Round 0's action; mixture 0.50/0.30/0.20 with uniform buckets when unset.
  std::optional<DataAction> initial_action;
  BackendKind backend = BackendKind::Simulator;
  SurfaceParams surface;
  std::filesystem::path replay_fixture;
  std::string external_command;
  PolicyConfig policy;
  double fail_threshold = kDefaultFailThreshold;

  /// Throws ConfigError.
  void validate() const;
  /// Defaults filled in, keys sorted; written to config.json and compared on resume.
  Json canonical() const;
};

LoopConfig loop_config_from_json(const Json& j, const std::filesystem::path& base_dir);
LoopConfig load_loop_config(const std::filesystem::path& path);

/// Replay run over a fixture: one round per non-base row, actions taken from the rows.
LoopConfig replay_config(const std::filesystem::path& fixture_path);

struct RunOptions {
  /// Stop after this many rounds in this invocation (the run stays resumable).
  std::optional<int> stop_after_rounds;
};

struct RunSummary {
  std::filesystem::path dir;
  int completed_rounds = 0;
  bool complete = false;
  std::vector<std::string> archive_labels;
};

/// Runs the closed loop into `out_dir`.
///
/// Layout:
///   config.json, cursor.json
///   base/      records.jsonl profiles.jsonl metric.json archive.json
///   round_NNN/ action.json rationale.json manifest.jsonl manifest_summary.json
///              records.jsonl profiles.jsonl metric.json archive.json
///   report/    trajectory.{txt,csv} archive.{txt,csv} slices.{txt,csv} micro_policy.csv
///
/// Every round is fully written before cursor.json advances. Rerunning with
/// the same directory and config resumes after the last completed round;
/// a different config is a ConfigError. Child seeds come from
/// derive_seed(master_seed, stage, round) with stages "sample" and "backend".
RunSummary run(const LoopConfig& config, const std::filesystem::path& out_dir, const RunOptions& options = {});

struct TrajectoryRow {
  std::string label;
  int round = kBaseRound;
  MetricVector metric;
  std::optional<std::array<double, 3>> mixture;
  std::size_t window_count = 0;
  std::uint64_t total_tokens = 0;
  std::size_t focus_count = 0;
  /// Same mixture as a neighbouring round but different bucket weights or focus.
  bool micro_only = false;
};

struct ReportBundle {
  std::vector<TrajectoryRow> trajectory;
  std::string trajectory_text;
  std::string trajectory_csv;
  std::string archive_text;
  std::string archive_csv;
  std::string slices_text;
  std::string slices_csv;
  std::string micro_policy_csv;
};

/// Builds the report from a run directory. Throws DataError for a run with no
/// completed round.
ReportBundle report(const std::filesystem::path& run_dir);

/// Writes the bundle into `<run_dir>/report/`.
void write_report(const ReportBundle& bundle, const std::filesystem::path& run_dir);

/// Latest archive snapshot of a run directory.
Json read_archive(const std::filesystem::path& run_dir);

/// "0.35 / 0.45 / 0.20"
std::string format_mixture(const std::array<double, 3>& m);

}  // namespace mixsearch
