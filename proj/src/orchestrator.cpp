#include "mixsearch/orchestrator.hpp"

#include "mixsearch/corpus.hpp"
#include "mixsearch/pareto.hpp"
#include "mixsearch/profile.hpp"
#include "mixsearch/random.hpp"
#include "mixsearch/rubric.hpp"

#include <fmt/format.h>
#include <spdlog/spdlog.h>

#include <algorithm>
#include <memory>

namespace mixsearch {

namespace fs = std::filesystem;

std::string_view to_string(BackendKind k) {
  switch (k) {
    case BackendKind::Simulator: return "simulator";
    case BackendKind::Replay: return "replay";
    case BackendKind::External: return "external";
  }
  return "?";
}

std::string format_mixture(const std::array<double, 3>& m) {
  return fmt::format("{:.2f} / {:.2f} / {:.2f}", m[0], m[1], m[2]);
}

// ---------------------------------------------------------------------------
// Config
// ---------------------------------------------------------------------------

void LoopConfig::validate() const {
  if (rounds < 1) throw ConfigError("rounds must be >= 1");
  if (budget_tokens < 1) throw ConfigError("budget_tokens must be positive");
  if (!(fail_threshold > 1.0 && fail_threshold <= 5.0)) throw ConfigError("fail_threshold must lie in (1, 5]");
  policy.validate();
  surface.validate();
  if (backend == BackendKind::Replay) {
    if (replay_fixture.empty()) throw ConfigError("replay backend needs a fixture path");
    return;
  }
  if (pool_manifest.empty()) throw ConfigError("pool_manifest is required");
  if (taxonomy.empty()) throw ConfigError("taxonomy is required");
  for (Dimension d : kAllDimensions) {
    if (eval_sets[index_of(d)].empty()) throw ConfigError(fmt::format("eval set for {} is required", to_string(d)));
  }
  if (initial_action) initial_action->validate();
}

Json LoopConfig::canonical() const {
  Json eval = Json::object();
  for (Dimension d : kAllDimensions) eval[std::string(to_string(d))] = eval_sets[index_of(d)].generic_string();
  Json backend_json = {{"kind", to_string(backend)}};
  switch (backend) {
    case BackendKind::Simulator: backend_json["surface"] = to_json(surface); break;
    case BackendKind::Replay: backend_json["fixture"] = replay_fixture.generic_string(); break;
    case BackendKind::External: backend_json["command"] = external_command; break;
  }
  Json j = {{"budget_tokens", budget_tokens},
            {"rounds", rounds},
            {"master_seed", master_seed},
            {"pool_manifest", pool_manifest.generic_string()},
            {"taxonomy", taxonomy.generic_string()},
            {"eval_sets", eval},
            {"backend", backend_json},
            {"policy", to_json(policy)},
            {"fail_threshold", fail_threshold}};
  j["initial_action"] = initial_action ? to_json(*initial_action) : Json(nullptr);
  return j;
}

namespace {

fs::path resolve(const fs::path& base_dir, const std::string& p) {
  if (p.empty()) return {};
  const fs::path path(p);
  return (path.is_absolute() ? path : base_dir / path).lexically_normal();
}

}  // namespace

LoopConfig loop_config_from_json(const Json& j, const fs::path& base_dir) {
  LoopConfig c;
  try {
    c.budget_tokens = j.value("budget_tokens", c.budget_tokens);
    c.rounds = j.value("rounds", c.rounds);
    c.master_seed = j.value("master_seed", c.master_seed);
    c.pool_manifest = resolve(base_dir, j.value("pool_manifest", ""));
    c.taxonomy = resolve(base_dir, j.value("taxonomy", ""));
    if (j.contains("eval_sets")) {
      for (Dimension d : kAllDimensions) {
        c.eval_sets[index_of(d)] = resolve(base_dir, j.at("eval_sets").value(std::string(to_string(d)), ""));
      }
    }
    if (j.contains("initial_action") && !j.at("initial_action").is_null()) {
      c.initial_action = action_from_json(j.at("initial_action"));
    }
    if (j.contains("backend")) {
      const Json& b = j.at("backend");
      const std::string kind = b.value("kind", "simulator");
      if (kind == "simulator") {
        c.backend = BackendKind::Simulator;
        if (b.contains("surface")) c.surface = surface_from_json(b.at("surface"));
      } else if (kind == "replay") {
        c.backend = BackendKind::Replay;
        c.replay_fixture = resolve(base_dir, b.value("fixture", ""));
      } else if (kind == "external") {
        c.backend = BackendKind::External;
        c.external_command = b.value("command", "");
      } else {
        throw ConfigError(fmt::format("unknown backend kind '{}'", kind));
      }
    }
    if (j.contains("policy")) c.policy = policy_from_json(j.at("policy"));
    c.fail_threshold = j.value("fail_threshold", c.fail_threshold);
  } catch (const Json::exception& e) {
    throw ConfigError(fmt::format("invalid loop config: {}", e.what()));
  }
  c.validate();
  return c;
}

LoopConfig load_loop_config(const fs::path& path) {
  Json j;
  try {
    j = read_json_file(path);
  } catch (const DataError& e) {
    throw ConfigError(e.what());
  }
  return loop_config_from_json(j, fs::absolute(path).parent_path());
}

LoopConfig replay_config(const fs::path& fixture_path) {
  const ReplayFixture fixture = ReplayFixture::load(fixture_path);
  LoopConfig c;
  c.backend = BackendKind::Replay;
  c.replay_fixture = fs::absolute(fixture_path).lexically_normal();
  c.rounds = fixture.round_count();
  c.validate();
  return c;
}

// ---------------------------------------------------------------------------
// Run
// ---------------------------------------------------------------------------

namespace {

std::string round_dir_name(int round) { return fmt::format("round_{:03d}", round); }

std::string round_label(int round) { return round == kBaseRound ? "Base" : fmt::format("Iter {}", round); }

std::string records_jsonl(const std::vector<EvalRecord>& records) {
  std::vector<Json> lines;
  lines.reserve(records.size());
  for (const auto& r : records) lines.push_back(to_json(r));
  return dump_lines(lines);
}

std::string profiles_jsonl(const std::vector<FailureProfile>& profiles) {
  std::vector<Json> lines;
  for (const auto& p : profiles) lines.push_back(to_json(p));
  return dump_lines(lines);
}

std::vector<FailureProfile> read_profiles(const fs::path& path) {
  std::vector<FailureProfile> out;
  for_each_jsonl(path, [&](const Json& j, std::size_t) { out.push_back(profile_from_json(j)); });
  return out;
}

Json metric_file(int round, const MetricVector& m, std::uint64_t seed, const std::string& origin,
                 const std::string& digest, const std::vector<EvalRecord>& records) {
  Json fixed = Json::object();
  std::array<std::size_t, 3> valid{};
  for (const auto& r : records) {
    if (r.valid) ++valid[index_of(r.dimension)];
  }
  Json counts = Json::object();
  for (Dimension d : kAllDimensions) {
    fixed[std::string(to_string(d))] = format4(m[d]);
    counts[std::string(to_string(d))] = valid[index_of(d)];
  }
  return {{"round", round},
          {"label", round_label(round)},
          {"metric", to_json(m)},
          {"metric_4dp", fixed},
          {"valid_counts", counts},
          {"backend_seed", seed},
          {"record_origin", origin},
          {"manifest_digest", digest}};
}

/// Loaded once per run: the pool, evaluation annotations and backend.
struct RunInputs {
  std::optional<Pool> pool;
  std::optional<ReplayFixture> fixture;
  std::array<std::vector<PromptAnnotation>, 3> eval;
  std::vector<BucketCatalog> catalogs;
  std::unique_ptr<Backend> backend;
};

RunInputs load_inputs(const LoopConfig& config) {
  RunInputs in;
  if (config.backend == BackendKind::Replay) {
    in.fixture = ReplayFixture::load(config.replay_fixture);
    in.catalogs = in.fixture->catalogs;
    in.backend = std::make_unique<ReplayBackend>(*in.fixture);
    return in;
  }
  in.pool = load_pool(read_pool_manifest(config.pool_manifest));
  if (config.budget_tokens < in.pool->max_window_tokens()) {
    throw ConfigError(fmt::format("budget {} is smaller than the longest window ({} tokens)", config.budget_tokens,
                                  in.pool->max_window_tokens()));
  }
  in.catalogs = in.pool->catalogs();
  const Taxonomy taxonomy = Taxonomy::load(config.taxonomy);
  for (Dimension d : kAllDimensions) {
    for (const auto& s : load_eval_samples(config.eval_sets[index_of(d)])) {
      if (dimension_of(s.dataset) != d) {
        throw DataError(fmt::format("sample '{}' of dataset {} is in the {} eval set", s.sample_id,
                                    to_string(s.dataset), to_string(d)));
      }
      in.eval[index_of(d)].push_back(annotate_prompt(s, taxonomy));
    }
  }
  if (config.backend == BackendKind::Simulator) {
    in.backend = std::make_unique<SimulatorBackend>(config.surface);
  } else {
    in.backend = std::make_unique<ExternalBackend>(config.external_command);
  }
  return in;
}

std::vector<EvalRecord> evaluate_checked(const Backend& backend, const BackendRequest& req) {
  auto records = backend.evaluate(req);
  for (const auto& r : records) {
    try {
      verify_record_consistency(r);
    } catch (const ContractError& e) {
      throw BackendError(fmt::format("{} backend emitted an inconsistent record: {}", backend.name(), e.what()));
    }
  }
  return records;
}

struct Cursor {
  bool base_done = false;
  int completed_rounds = 0;
};

Cursor read_cursor(const fs::path& dir) {
  const fs::path p = dir / "cursor.json";
  if (!fs::exists(p)) return {};
  const Json j = read_json_file(p);
  return {j.value("base_done", false), j.value("completed_rounds", 0)};
}

void write_cursor(const fs::path& dir, const Cursor& c) {
  write_file_atomic(dir / "cursor.json",
                    dump_pretty({{"base_done", c.base_done}, {"completed_rounds", c.completed_rounds}}));
}

}  // namespace

RunSummary run(const LoopConfig& config, const fs::path& out_dir, const RunOptions& options) {
  config.validate();
  fs::create_directories(out_dir);
  const Json canonical = config.canonical();
  const fs::path config_path = out_dir / "config.json";
  if (fs::exists(config_path)) {
    if (read_json_file(config_path) != canonical) {
      throw ConfigError(fmt::format("'{}' holds a run with a different config", out_dir.string()));
    }
  } else {
    write_file_atomic(config_path, dump_pretty(canonical));
  }

  RunInputs in = load_inputs(config);
  Cursor cursor = read_cursor(out_dir);

  // Drop anything a crashed invocation left past the cursor.
  if (!cursor.base_done) fs::remove_all(out_dir / "base");
  for (const auto& entry : fs::directory_iterator(out_dir)) {
    const std::string name = entry.path().filename().string();
    if (entry.is_directory() && name.starts_with("round_") && std::stoi(name.substr(6)) >= cursor.completed_rounds) {
      fs::remove_all(entry.path());
    }
  }
  fs::remove_all(out_dir / "report");

  ParetoArchive archive;
  std::optional<MetricVector> base_metric;

  if (cursor.base_done) {
    base_metric = metric_from_json(read_json_file(out_dir / "base" / "metric.json").at("metric"));
  } else {
    BackendRequest req;
    req.round_index = kBaseRound;
    req.eval = in.eval;
    req.seed = derive_seed(config.master_seed, "backend", kBaseRound);
    const auto records = evaluate_checked(*in.backend, req);
    const MetricVector m = metric_vector(records);
    const auto profiles = build_failure_profiles(records, config.fail_threshold);
    archive.insert(round_label(kBaseRound), m);
    const fs::path dir = out_dir / "base";
    write_file_atomic(dir / "records.jsonl", records_jsonl(records));
    write_file_atomic(dir / "profiles.jsonl", profiles_jsonl(profiles));
    write_file_atomic(dir / "metric.json", dump_pretty(metric_file(kBaseRound, m, req.seed, in.backend->record_origin(), "", records)));
    write_file_atomic(dir / "archive.json", dump_pretty(archive.snapshot()));
    base_metric = m;
    cursor.base_done = true;
    write_cursor(out_dir, cursor);
    spdlog::info("base: {} {} {}", format4(m[Dimension::Safe]), format4(m[Dimension::Benign]), format4(m[Dimension::IF]));
  }

  RoundHistory history(base_metric);
  for (int t = 0; t < cursor.completed_rounds; ++t) {
    const fs::path dir = out_dir / round_dir_name(t);
    const Json metric = read_json_file(dir / "metric.json");
    RoundRecord rec;
    rec.round_index = t;
    rec.action = action_from_json(read_json_file(dir / "action.json"));
    rec.metric = metric_from_json(metric.at("metric"));
    rec.profiles = read_profiles(dir / "profiles.jsonl");
    rec.manifest_digest = metric.at("manifest_digest").get<std::string>();
    rec.seed = metric.at("backend_seed").get<std::uint64_t>();
    history.append(std::move(rec));
  }
  const fs::path last_archive =
      cursor.completed_rounds > 0 ? out_dir / round_dir_name(cursor.completed_rounds - 1) / "archive.json" : out_dir / "base" / "archive.json";
  if (cursor.completed_rounds > 0 || archive.history().empty()) {
    archive = ParetoArchive::from_snapshot(read_json_file(last_archive));
  }

  const RuleBasedPolicy policy(config.policy);
  int ran = 0;
  for (int t = cursor.completed_rounds; t < config.rounds; ++t) {
    if (options.stop_after_rounds && ran >= *options.stop_after_rounds) break;
    const fs::path dir = out_dir / round_dir_name(t);

    Proposal proposal;
    std::string policy_name;
    if (in.fixture) {
      proposal.action = in.fixture->action(t);
      proposal.rationale.push_back({"replay", fmt::format("action recorded in fixture row {}", t)});
      policy_name = "replay";
    } else if (t == 0) {
      if (config.initial_action) {
        proposal.action = *config.initial_action;
      } else {
        proposal.action.mixture = {0.50, 0.30, 0.20};
      }
      if (proposal.action.bucket_weights.empty()) proposal.action.bucket_weights = uniform_bucket_weights(in.catalogs);
      proposal.rationale.push_back({"initial", "round 0 action from config"});
      policy_name = "initial";
    } else {
      proposal = policy.propose(history, in.catalogs);
      policy_name = policy.name();
    }
    proposal.action.validate(in.catalogs);

    SampleManifest manifest;
    const std::uint64_t sample_seed = derive_seed(config.master_seed, "sample", t);
    Json manifest_summary;
    if (in.pool) {
      manifest = draw_budgeted(effective_distribution(proposal.action, *in.pool), *in.pool, config.budget_tokens, sample_seed);
      manifest_summary = manifest.summary();
    } else {
      manifest.seed = sample_seed;
      manifest.budget_tokens = config.budget_tokens;
      manifest_summary = manifest.summary();
      manifest_summary["note"] = "replay backend: no training draw";
    }

    BackendRequest req;
    req.round_index = t;
    req.action = proposal.action;
    req.manifest = in.pool ? &manifest : nullptr;
    req.eval = in.eval;
    req.seed = derive_seed(config.master_seed, "backend", t);
    const auto records = evaluate_checked(*in.backend, req);
    const MetricVector m = metric_vector(records);
    const auto profiles = build_failure_profiles(records, config.fail_threshold);
    const auto outcome = archive.insert(round_label(t), m);

    write_file_atomic(dir / "action.json", dump_pretty(to_json(proposal.action)));
    write_file_atomic(dir / "rationale.json", dump_pretty(proposal.rationale_json(policy_name)));
    write_file_atomic(dir / "manifest.jsonl", manifest.to_jsonl());
    write_file_atomic(dir / "manifest_summary.json", dump_pretty(manifest_summary));
    write_file_atomic(dir / "records.jsonl", records_jsonl(records));
    write_file_atomic(dir / "profiles.jsonl", profiles_jsonl(profiles));
    write_file_atomic(dir / "metric.json",
                      dump_pretty(metric_file(t, m, req.seed, in.backend->record_origin(), manifest.digest(), records)));
    write_file_atomic(dir / "archive.json", dump_pretty(archive.snapshot()));

    history.append({t, proposal.action, m, profiles, manifest.digest(), req.seed});
    cursor.completed_rounds = t + 1;
    write_cursor(out_dir, cursor);
    ++ran;
    spdlog::info("round {}: {} {} {} mixture {} -> {}", t, format4(m[Dimension::Safe]), format4(m[Dimension::Benign]),
                 format4(m[Dimension::IF]), format_mixture(proposal.action.mixture), to_string(outcome.verdict));
  }

  RunSummary summary;
  summary.dir = out_dir;
  summary.completed_rounds = cursor.completed_rounds;
  summary.complete = cursor.completed_rounds >= config.rounds;
  for (const auto& e : archive.entries()) summary.archive_labels.push_back(e.label);
  if (summary.complete) write_report(report(out_dir), out_dir);
  return summary;
}

// ---------------------------------------------------------------------------
// Report
// ---------------------------------------------------------------------------

Json read_archive(const fs::path& run_dir) {
  const Cursor cursor = read_cursor(run_dir);
  if (!cursor.base_done) throw DataError(fmt::format("'{}' has no completed rounds", run_dir.string()));
  const fs::path p = cursor.completed_rounds > 0 ? run_dir / round_dir_name(cursor.completed_rounds - 1) / "archive.json"
                                                 : run_dir / "base" / "archive.json";
  return read_json_file(p);
}

namespace {

bool same_micro_policy(const DataAction& a, const DataAction& b) {
  if (a.bucket_weights != b.bucket_weights) return false;
  if (a.focus.size() != b.focus.size()) return false;
  for (std::size_t i = 0; i < a.focus.size(); ++i) {
    if (!(a.focus[i] == b.focus[i])) return false;
  }
  return true;
}

bool same_mixture(const std::array<double, 3>& a, const std::array<double, 3>& b) {
  for (std::size_t i = 0; i < 3; ++i) {
    if (std::abs(a[i] - b[i]) > kSimplexTolerance) return false;
  }
  return true;
}

std::string pad(std::string s, std::size_t width) {
  if (s.size() < width) s.append(width - s.size(), ' ');
  return s;
}

}  // namespace

ReportBundle report(const fs::path& run_dir) {
  const Cursor cursor = read_cursor(run_dir);
  if (!cursor.base_done || cursor.completed_rounds < 1) {
    throw DataError(fmt::format("cannot report on '{}': no completed round", run_dir.string()));
  }
  ReportBundle b;

  struct RoundData {
    DataAction action;
    std::vector<FailureProfile> profiles;
    Json manifest_summary;
  };
  std::vector<RoundData> rounds;

  {
    TrajectoryRow base;
    base.label = round_label(kBaseRound);
    base.metric = metric_from_json(read_json_file(run_dir / "base" / "metric.json").at("metric"));
    b.trajectory.push_back(base);
  }
  for (int t = 0; t < cursor.completed_rounds; ++t) {
    const fs::path dir = run_dir / round_dir_name(t);
    RoundData rd{action_from_json(read_json_file(dir / "action.json")), read_profiles(dir / "profiles.jsonl"),
                 read_json_file(dir / "manifest_summary.json")};
    TrajectoryRow row;
    row.label = round_label(t);
    row.round = t;
    row.metric = metric_from_json(read_json_file(dir / "metric.json").at("metric"));
    row.mixture = rd.action.mixture;
    row.window_count = rd.manifest_summary.value("window_count", std::size_t{0});
    row.total_tokens = rd.manifest_summary.value("total_tokens", std::uint64_t{0});
    row.focus_count = rd.action.focus.size();
    b.trajectory.push_back(row);
    rounds.push_back(std::move(rd));
  }
  for (std::size_t t = 0; t < rounds.size(); ++t) {
    for (std::size_t n : {t - 1, t + 1}) {
      if (n >= rounds.size()) continue;  // t - 1 wraps for t == 0
      if (same_mixture(rounds[t].action.mixture, rounds[n].action.mixture) &&
          !same_micro_policy(rounds[t].action, rounds[n].action)) {
        b.trajectory[t + 1].micro_only = true;
      }
    }
  }

  // Trajectory.
  b.trajectory_text = fmt::format("{}{}{}{}{}{:>8}  {}\n", pad("Round", 8), pad("SAFE", 9), pad("BENIGN", 9), pad("IF", 9),
                                  pad("Mixture (x/o/i)", 20), "Windows", "Note");
  b.trajectory_csv = "round,label,safe,benign,if,mix_xguard,mix_orbench,mix_if,mixture,windows,total_tokens,focus_count,macro_fixed_micro_varies\n";
  for (const auto& r : b.trajectory) {
    const std::string round = r.round == kBaseRound ? "Base" : std::to_string(r.round);
    const std::string mix = r.mixture ? format_mixture(*r.mixture) : "no fine-tuning";
    std::string note;
    if (r.micro_only) note = "macro fixed, micro varies";
    b.trajectory_text += fmt::format("{}{}{}{}{}{:>8}  {}\n", pad(round, 8), pad(format4(r.metric[Dimension::Safe]), 9),
                                     pad(format4(r.metric[Dimension::Benign]), 9), pad(format4(r.metric[Dimension::IF]), 9),
                                     pad(mix, 20), r.window_count > 0 ? std::to_string(r.window_count) : "-", note);
    b.trajectory_csv += fmt::format(
        "{},{},{},{},{},{},{},{},{},{},{},{},{}\n", r.round == kBaseRound ? "base" : std::to_string(r.round), r.label,
        format4(r.metric[Dimension::Safe]), format4(r.metric[Dimension::Benign]), format4(r.metric[Dimension::IF]),
        r.mixture ? fmt::format("{:.4f}", (*r.mixture)[0]) : "", r.mixture ? fmt::format("{:.4f}", (*r.mixture)[1]) : "",
        r.mixture ? fmt::format("{:.4f}", (*r.mixture)[2]) : "", r.mixture ? format_mixture(*r.mixture) : "",
        r.window_count, r.total_tokens, r.focus_count, r.micro_only ? 1 : 0);
  }

  // Archive, with the dimensions each entry leads.
  const Json archive = read_archive(run_dir);
  std::vector<std::pair<std::string, MetricVector>> entries;
  for (const auto& e : archive.at("entries")) entries.emplace_back(e.at("label").get<std::string>(), metric_from_json(e.at("metric")));
  std::array<double, 3> best{};
  best.fill(0.0);
  for (const auto& [_, m] : entries) {
    for (Dimension d : kAllDimensions) best[index_of(d)] = std::max(best[index_of(d)], round4(m[d]));
  }
  b.archive_text = fmt::format("{}{}{}{}{}\n", pad("Solution", 10), pad("SAFE", 9), pad("BENIGN", 9), pad("IF", 9), "Leads");
  b.archive_csv = "label,safe,benign,if,leads\n";
  for (const auto& [label, m] : entries) {
    std::vector<std::string> leads;
    for (Dimension d : kAllDimensions) {
      if (round4(m[d]) == best[index_of(d)]) leads.emplace_back(to_string(d));
    }
    const std::string lead = leads.empty() ? "-" : fmt::format("{}", fmt::join(leads, " "));
    b.archive_text += fmt::format("{}{}{}{}{}\n", pad(label, 10), pad(format4(m[Dimension::Safe]), 9),
                                  pad(format4(m[Dimension::Benign]), 9), pad(format4(m[Dimension::IF]), 9), lead);
    b.archive_csv += fmt::format("{},{},{},{},{}\n", label, format4(m[Dimension::Safe]), format4(m[Dimension::Benign]),
                                 format4(m[Dimension::IF]), lead);
  }

  // Per-slice failure decomposition: every round in CSV; archive members in text.
  b.slices_csv = "round,dimension,slice,sample_count,mean_score,fail_rate,weight_mass,fail_mass,top_modes\n";
  auto top_modes = [](const FailureProfile& p) {
    std::vector<std::pair<std::string, std::int64_t>> modes(p.breakdown.begin(), p.breakdown.end());
    std::stable_sort(modes.begin(), modes.end(), [](const auto& a, const auto& c) { return a.second > c.second; });
    std::vector<std::string> parts;
    for (std::size_t i = 0; i < std::min<std::size_t>(3, modes.size()); ++i) {
      parts.push_back(fmt::format("{}:{}", modes[i].first, modes[i].second));
    }
    return fmt::format("{}", fmt::join(parts, " "));
  };
  auto profiles_for = [&](const std::string& label) -> std::vector<FailureProfile> {
    if (label == round_label(kBaseRound)) return read_profiles(run_dir / "base" / "profiles.jsonl");
    for (std::size_t t = 0; t < rounds.size(); ++t) {
      if (round_label(static_cast<int>(t)) == label) return rounds[t].profiles;
    }
    return {};
  };
  for (std::size_t t = 0; t < rounds.size(); ++t) {
    for (const auto& p : rounds[t].profiles) {
      b.slices_csv += fmt::format("{},{},\"{}\",{},{:.4f},{:.4f},{:.4f},{:.4f},\"{}\"\n", t, to_string(p.dimension),
                                  p.slice_key(), p.sample_count, p.mean_score, p.fail_rate, p.weight_mass, p.fail_mass(),
                                  top_modes(p));
    }
  }
  for (const auto& [label, _] : entries) {
    b.slices_text += fmt::format("== {} ==\n", label);
    const auto profiles = profiles_for(label);
    for (Dimension d : kAllDimensions) {
      std::vector<FailureProfile> dim;
      for (const auto& p : profiles) {
        if (p.dimension == d) dim.push_back(p);
      }
      for (const auto& p : rank_slices(dim)) {
        if (p.failed_count == 0) continue;
        b.slices_text += fmt::format("  {:<7} {:<40} n={:<4} mean={:.4f} fail={:.3f}  {}\n", to_string(d), p.slice_key(),
                                     p.sample_count, p.mean_score, p.fail_rate, top_modes(p));
      }
    }
  }

  // Micro policy per round (bucket weights and focus hits).
  b.micro_policy_csv = "round,kind,dataset,key,value\n";
  for (std::size_t t = 0; t < rounds.size(); ++t) {
    for (const auto& [ds, weights] : rounds[t].action.bucket_weights) {
      for (const auto& [bucket, w] : weights) {
        b.micro_policy_csv += fmt::format("{},bucket_weight,{},{},{:.6f}\n", t, to_string(ds), bucket, w);
      }
    }
    const Json& ft = rounds[t].manifest_summary.contains("focus_tokens") ? rounds[t].manifest_summary.at("focus_tokens") : Json::array();
    for (std::size_t f = 0; f < rounds[t].action.focus.size(); ++f) {
      const auto tokens = f < ft.size() ? ft[f].get<std::uint64_t>() : 0;
      b.micro_policy_csv += fmt::format("{},focus_tokens,,\"{}\",{}\n", t, rounds[t].action.focus[f].label, tokens);
    }
  }
  return b;
}

void write_report(const ReportBundle& bundle, const fs::path& run_dir) {
  const fs::path dir = run_dir / "report";
  write_file_atomic(dir / "trajectory.txt", bundle.trajectory_text);
  write_file_atomic(dir / "trajectory.csv", bundle.trajectory_csv);
  write_file_atomic(dir / "archive.txt", bundle.archive_text);
  write_file_atomic(dir / "archive.csv", bundle.archive_csv);
  write_file_atomic(dir / "slices.txt", bundle.slices_text);
  write_file_atomic(dir / "slices.csv", bundle.slices_csv);
  write_file_atomic(dir / "micro_policy.csv", bundle.micro_policy_csv);
}

}  // namespace mixsearch
