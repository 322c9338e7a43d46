#include "mixsearch/backend.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <cmath>
#include <numeric>

namespace mixsearch {

void SurfaceParams::validate() const {
  for (std::size_t d = 0; d < 3; ++d) {
    if (!(base[d] >= 1.0 && base[d] <= 5.0)) throw ConfigError("surface base scores must lie in [1, 5]");
    if (!(gain[d] >= 0.0)) throw ConfigError("surface gains must be non-negative");
    if (!(saturation[d] > 0.0)) throw ConfigError("surface saturation must be positive");
    for (std::size_t e = 0; e < 3; ++e) {
      if (!(interference[d][e] >= 0.0)) throw ConfigError("surface interference must be non-negative");
    }
  }
  if (!(slice_noise >= 0.0) || !(sample_spread >= 0.0)) throw ConfigError("noise amplitudes must be non-negative");
}

namespace {

std::array<double, 3> per_dimension(const Json& j, const char* key, std::array<double, 3> fallback) {
  if (!j.contains(key)) return fallback;
  const Json& v = j.at(key);
  for (Dimension d : kAllDimensions) fallback[index_of(d)] = v.value(std::string(to_string(d)), fallback[index_of(d)]);
  return fallback;
}

Json per_dimension_json(const std::array<double, 3>& v) {
  Json j = Json::object();
  for (Dimension d : kAllDimensions) j[std::string(to_string(d))] = v[index_of(d)];
  return j;
}

}  // namespace

SurfaceParams surface_from_json(const Json& j) {
  SurfaceParams p;
  try {
    p.base = per_dimension(j, "base", p.base);
    p.gain = per_dimension(j, "gain", p.gain);
    p.saturation = per_dimension(j, "saturation", p.saturation);
    if (j.contains("interference")) {
      for (const auto& [row, cols] : j.at("interference").items()) {
        const auto d = index_of(parse_dimension(row));
        for (const auto& [col, value] : cols.items()) p.interference[d][index_of(parse_dimension(col))] = value.get<double>();
      }
    }
    p.slice_noise = j.value("slice_noise", p.slice_noise);
    p.sample_spread = j.value("sample_spread", p.sample_spread);
  } catch (const Json::exception& e) {
    throw ConfigError(fmt::format("invalid surface params: {}", e.what()));
  }
  p.validate();
  return p;
}

Json to_json(const SurfaceParams& p) {
  Json inter = Json::object();
  for (Dimension d : kAllDimensions) {
    Json row = Json::object();
    for (Dimension e : kAllDimensions) {
      if (d != e) row[std::string(to_string(e))] = p.interference[index_of(d)][index_of(e)];
    }
    inter[std::string(to_string(d))] = row;
  }
  return {{"base", per_dimension_json(p.base)},
          {"gain", per_dimension_json(p.gain)},
          {"saturation", per_dimension_json(p.saturation)},
          {"interference", inter},
          {"slice_noise", p.slice_noise},
          {"sample_spread", p.sample_spread}};
}

MetricVector surface_means(const std::array<double, 3>& x, const SurfaceParams& p) {
  MetricVector m;
  for (std::size_t d = 0; d < 3; ++d) {
    double mu = p.base[d] + p.gain[d] * (1.0 - std::exp(-x[d] / p.saturation[d]));
    for (std::size_t e = 0; e < 3; ++e) {
      if (e != d) mu -= p.interference[d][e] * x[e];
    }
    m.values[d] = std::clamp(mu, 1.0, 5.0);
  }
  return m;
}

std::vector<int> assign_scores(const std::vector<double>& targets, std::int64_t total) {
  const auto n = static_cast<std::int64_t>(targets.size());
  if (total < n || total > 5 * n) {
    throw ContractError(fmt::format("cannot place a score total of {} on {} samples", total, n));
  }
  std::vector<int> v(targets.size());
  std::vector<double> residual(targets.size());
  std::int64_t sum = 0;
  for (std::size_t i = 0; i < targets.size(); ++i) {
    v[i] = static_cast<int>(std::clamp<long long>(std::llround(targets[i]), 1, 5));
    residual[i] = targets[i] - v[i];
    sum += v[i];
  }
  // Each step moves the sample whose rounding left it furthest from its target.
  for (; sum < total; ++sum) {
    std::size_t best = targets.size();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] < 5 && (best == targets.size() || residual[i] > residual[best])) best = i;
    }
    ++v[best];
    residual[best] -= 1.0;
  }
  for (; sum > total; --sum) {
    std::size_t best = targets.size();
    for (std::size_t i = 0; i < v.size(); ++i) {
      if (v[i] > 1 && (best == targets.size() || residual[i] < residual[best])) best = i;
    }
    --v[best];
    residual[best] += 1.0;
  }
  return v;
}

namespace {

struct SyntheticCheck {
  std::string id;
  CheckRole role;
  std::string family;
};

std::vector<SyntheticCheck> synthetic_layout(Dimension d) {
  std::vector<SyntheticCheck> out;
  if (d == Dimension::IF) {
    out.push_back({"format_hard", CheckRole::Floor, "FORMAT"});
    out.push_back({"length", CheckRole::Soft, "LENGTH"});
    out.push_back({"inclusion", CheckRole::Soft, "INCLUSION"});
    out.push_back({"exclusion", CheckRole::Soft, "EXCLUSION"});
    out.push_back({"structure", CheckRole::Soft, "STRUCTURE"});
    return out;
  }
  for (const auto& def : check_catalog(d)) out.push_back({std::string(def.id), def.role, ""});
  return out;
}

template <typename T>
void shuffle(std::vector<T>& v, Rng& rng) {
  for (std::size_t i = v.size(); i > 1; --i) std::swap(v[i - 1], v[rng.below(i)]);
}

}  // namespace

AtomicCheckVector synthesize_checks(Dimension d, int score, const SliceDescriptor& slice, Rng& rng) {
  if (score < 1 || score > 5) throw ContractError(fmt::format("synthetic score {} outside [1, 5]", score));
  const auto layout = synthetic_layout(d);
  std::vector<std::size_t> floors;
  std::vector<std::size_t> softs;
  for (std::size_t i = 0; i < layout.size(); ++i) (layout[i].role == CheckRole::Floor ? floors : softs).push_back(i);

  std::vector<bool> passed(layout.size(), true);
  // Soft checks fail in a seeded order; for IF the slice's own family fails first.
  shuffle(softs, rng);
  if (d == Dimension::IF) {
    if (const auto fam = slice.find("family"); fam != slice.end()) {
      std::stable_partition(softs.begin(), softs.end(), [&](std::size_t i) { return layout[i].family == fam->second; });
    }
  }
  std::size_t soft_pass = 0;
  if (score == 1) {
    passed[floors[rng.below(floors.size())]] = false;
    soft_pass = rng.below(softs.size() + 1);
  } else {
    soft_pass = static_cast<std::size_t>(score - 1);
  }
  const std::size_t soft_fail = softs.size() - soft_pass;
  for (std::size_t k = 0; k < soft_fail; ++k) passed[softs[k]] = false;

  AtomicCheckVector v{d, {}};
  for (std::size_t i = 0; i < layout.size(); ++i) {
    v.checks.push_back({layout[i].id, passed[i], layout[i].role, 1.0, layout[i].family});
  }
  return v;
}

namespace {

EvalRecord make_record(const PromptAnnotation& a, int score, Rng& rng) {
  EvalRecord r;
  r.sample_id = a.sample_id;
  r.dimension = a.dimension;
  r.valid = a.valid;
  r.reason = a.reason;
  r.slice = a.slice;
  r.weight = a.weight;
  r.checks = synthesize_checks(a.dimension, score, a.slice, rng);
  r.l2_state = aggregate_l2(r.checks);
  r.score = score_l1(r.checks, r.l2_state).value;
  return r;
}

std::int64_t slice_total(double mean, std::size_t n) {
  const auto count = static_cast<std::int64_t>(n);
  return std::clamp<std::int64_t>(std::llround(mean * static_cast<double>(n)), count, 5 * count);
}

}  // namespace

std::vector<EvalRecord> simulate_round(const BackendRequest& req, const SurfaceParams& params) {
  params.validate();
  std::array<double, 3> share{};
  if (req.manifest != nullptr && req.manifest->total_tokens > 0) {
    const auto tokens = req.manifest->dataset_tokens();
    for (std::size_t d = 0; d < 3; ++d) {
      share[d] = static_cast<double>(tokens[d]) / static_cast<double>(req.manifest->total_tokens);
    }
  }
  const MetricVector mu = surface_means(share, params);

  std::vector<EvalRecord> out;
  for (Dimension dim : kAllDimensions) {
    const auto& samples = req.eval[index_of(dim)];
    std::vector<EvalRecord> records(samples.size());

    // Group sample indices by slice; invalid samples form their own group.
    std::map<std::string, std::vector<std::size_t>> groups;
    for (std::size_t i = 0; i < samples.size(); ++i) {
      groups[samples[i].valid ? "valid:" + slice_id(samples[i].slice) : std::string("invalid")].push_back(i);
    }
    for (const auto& [key, members] : groups) {
      Rng slice_rng(derive_seed(req.seed, fmt::format("slice:{}:{}", to_string(dim), key), 0));
      const double offset = params.slice_noise > 0.0 ? params.slice_noise * slice_rng.normal() : 0.0;
      const double slice_mean = std::clamp(mu[dim] + offset, 1.0, 5.0);

      std::vector<double> targets;
      for (std::size_t i : members) {
        Rng sample_rng(derive_seed(req.seed, "sample:" + samples[i].sample_id, static_cast<std::int64_t>(index_of(dim))));
        targets.push_back(slice_mean + (params.sample_spread > 0.0 ? params.sample_spread * sample_rng.normal() : 0.0));
      }
      const auto scores = assign_scores(targets, slice_total(slice_mean, members.size()));
      for (std::size_t k = 0; k < members.size(); ++k) {
        const auto& a = samples[members[k]];
        Rng check_rng(derive_seed(req.seed, "checks:" + a.sample_id, static_cast<std::int64_t>(index_of(dim))));
        records[members[k]] = make_record(a, scores[k], check_rng);
      }
    }
    std::move(records.begin(), records.end(), std::back_inserter(out));
  }
  return out;
}

std::vector<EvalRecord> replay_round(const ReplayFixture& fixture, int round_index) {
  const ReplayRow* row = fixture.find(round_index);
  if (row == nullptr) throw BackendError(fmt::format("replay gap: fixture has no row for round {}", round_index));
  const std::size_t n = fixture.eval_size;

  std::vector<EvalRecord> out;
  for (Dimension dim : kAllDimensions) {
    const double mean = row->metrics[dim];
    const std::int64_t total = std::llround(mean * static_cast<double>(n));
    if (to_ticks(static_cast<double>(total) / static_cast<double>(n)) != to_ticks(mean)) {
      throw FixtureError(fmt::format("row '{}': {} mean {} is not representable with {} samples", row->label,
                                     to_string(dim), format4(mean), n));
    }
    std::vector<SliceDescriptor> slices;
    if (const auto it = fixture.slices.find(dim); it != fixture.slices.end()) slices = it->second;
    if (slices.empty()) slices.push_back({{"synthetic", "all"}});
    const auto overrides = row->slice_means.find(dim);

    std::vector<PromptAnnotation> samples;
    std::vector<double> targets;
    for (std::size_t i = 0; i < n; ++i) {
      PromptAnnotation a;
      a.sample_id = fmt::format("replay-{}-{:04d}", to_string(dim), i);
      a.dimension = dim;
      a.slice = slices[i % slices.size()];
      double t = mean;
      if (overrides != row->slice_means.end()) {
        if (const auto o = overrides->second.find(slice_id(a.slice)); o != overrides->second.end()) t = o->second;
      }
      Rng rng(derive_seed(fixture.seed, "replay:" + a.sample_id, round_index));
      targets.push_back(t + rng.normal());
      samples.push_back(std::move(a));
    }
    const auto scores = assign_scores(targets, total);
    for (std::size_t i = 0; i < n; ++i) {
      Rng rng(derive_seed(fixture.seed, "replay-checks:" + samples[i].sample_id, round_index));
      out.push_back(make_record(samples[i], scores[i], rng));
    }
  }
  return out;
}

std::vector<EvalRecord> ExternalBackend::evaluate(const BackendRequest& req) const {
  throw BackendError(fmt::format("external backend '{}' is not available in this build (round {})", command_,
                                 req.round_index));
}

SimulatorBackend::SimulatorBackend(SurfaceParams params) : params_(params) { params_.validate(); }

}  // namespace mixsearch
