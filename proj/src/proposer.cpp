#include "mixsearch/proposer.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <numeric>

namespace mixsearch {

void RoundHistory::append(RoundRecord record) {
  if (record.round_index != static_cast<int>(rounds_.size())) {
    throw ContractError(fmt::format("round {} appended after {} rounds", record.round_index, rounds_.size()));
  }
  rounds_.push_back(std::move(record));
}

const RoundRecord& RoundHistory::latest() const {
  if (rounds_.empty()) throw ContractError("history is empty");
  return rounds_.back();
}

std::optional<MetricVector> RoundHistory::previous_metric() const {
  if (rounds_.size() >= 2) return rounds_[rounds_.size() - 2].metric;
  return base_;
}

void PolicyConfig::validate() const {
  if (!(max_ratio_step > 0.0 && max_ratio_step <= 1.0)) throw ConfigError("max_ratio_step must be in (0, 1]");
  if (!(dataset_floor >= 0.0) || dataset_floor * 3.0 > 1.0 + kSimplexTolerance) {
    throw ConfigError(fmt::format("dataset floor {} is infeasible for three datasets", dataset_floor));
  }
  if (!(focus_cap > 0.0 && focus_cap <= 1.0)) throw ConfigError("focus_cap must be in (0, 1]");
  if (!(regression_guard >= 0.0)) throw ConfigError("regression_guard must be non-negative");
  if (!(focus_boost >= 1.0)) throw ConfigError("focus_boost must be >= 1");
  if (!(smoothing_fraction > 0.0)) throw ConfigError("smoothing_fraction must be positive");
  for (double t : target) {
    if (!(t >= 1.0 && t <= 5.0)) throw ConfigError("targets must lie in [1, 5]");
  }
}

PolicyConfig policy_from_json(const Json& j) {
  PolicyConfig c;
  try {
    if (j.contains("target")) {
      for (Dimension d : kAllDimensions) {
        c.target[index_of(d)] = j.at("target").value(std::string(to_string(d)), c.target[index_of(d)]);
      }
    }
    c.max_ratio_step = j.value("max_ratio_step", c.max_ratio_step);
    c.dataset_floor = j.value("dataset_floor", c.dataset_floor);
    c.focus_cap = j.value("focus_cap", c.focus_cap);
    c.regression_guard = j.value("regression_guard", c.regression_guard);
    c.focus_boost = j.value("focus_boost", c.focus_boost);
    c.smoothing_fraction = j.value("smoothing_fraction", c.smoothing_fraction);
  } catch (const Json::exception& e) {
    throw ConfigError(fmt::format("invalid policy config: {}", e.what()));
  }
  c.validate();
  return c;
}

Json to_json(const PolicyConfig& c) {
  Json target = Json::object();
  for (Dimension d : kAllDimensions) target[std::string(to_string(d))] = c.target[index_of(d)];
  return {{"target", target},
          {"max_ratio_step", c.max_ratio_step},
          {"dataset_floor", c.dataset_floor},
          {"focus_cap", c.focus_cap},
          {"regression_guard", c.regression_guard},
          {"focus_boost", c.focus_boost},
          {"smoothing_fraction", c.smoothing_fraction}};
}

Json Proposal::rationale_json(std::string_view policy_name) const {
  Json entries = Json::array();
  for (const auto& r : rationale) entries.push_back({{"rule", r.rule}, {"detail", r.detail}});
  return {{"policy", policy_name}, {"entries", entries}, {"action", to_json(action)}};
}

namespace {

using Mixture = std::array<double, 3>;

std::string fmt_mix(const Mixture& m) { return fmt::format("{:.4f}/{:.4f}/{:.4f}", m[0], m[1], m[2]); }

/// Moves up to `amount` into `receiver` from `donors`, split by `weights`
/// (equal when all zero), never pushing a donor below `floor`. Returns the
/// amount actually moved.
double transfer(Mixture& mix, std::size_t receiver, const std::vector<std::size_t>& donors,
                std::vector<double> weights, double amount, double floor) {
  if (std::all_of(weights.begin(), weights.end(), [](double w) { return w <= 0.0; })) {
    std::fill(weights.begin(), weights.end(), 1.0);
  }
  double remaining = amount;
  std::vector<bool> active(donors.size());
  for (std::size_t i = 0; i < donors.size(); ++i) active[i] = weights[i] > 0.0 && mix[donors[i]] - floor > 1e-15;
  // Water-filling: donors that hit the floor drop out and the rest share the remainder.
  while (remaining > 1e-15) {
    double wsum = 0.0;
    for (std::size_t i = 0; i < donors.size(); ++i) {
      if (active[i]) wsum += weights[i];
    }
    if (wsum <= 0.0) break;
    double given = 0.0;
    for (std::size_t i = 0; i < donors.size(); ++i) {
      if (!active[i]) continue;
      const double want = remaining * weights[i] / wsum;
      const double room = mix[donors[i]] - floor;
      const double give = std::min(want, room);
      mix[donors[i]] -= give;
      given += give;
      if (room - give <= 1e-15) active[i] = false;
    }
    remaining -= given;
    if (given <= 0.0) break;
  }
  const double moved = amount - std::max(remaining, 0.0);
  mix[receiver] += moved;
  return moved;
}

/// Raises shares below `floor`, taking from shares above it proportionally.
Mixture enforce_floors(Mixture mix, double floor) {
  double deficit = 0.0;
  double excess = 0.0;
  for (double m : mix) {
    if (m < floor) deficit += floor - m;
    else excess += m - floor;
  }
  if (deficit <= 0.0) return mix;
  for (double& m : mix) {
    if (m < floor) m = floor;
    else m -= deficit * (m - floor) / excess;
  }
  return mix;
}

std::size_t argmax(const Mixture& v, std::optional<std::size_t> exclude = std::nullopt) {
  std::size_t best = 3;
  for (std::size_t i = 0; i < 3; ++i) {
    if (exclude && *exclude == i) continue;
    if (best == 3 || v[i] > v[best]) best = i;
  }
  return best;
}

std::string top_mode(const FailureProfile& p) {
  std::string best;
  std::int64_t count = -1;
  for (const auto& [mode, n] : p.breakdown) {
    if (n > count) {
      best = mode;
      count = n;
    }
  }
  return best;
}

}  // namespace

RuleBasedPolicy::RuleBasedPolicy(PolicyConfig config) : config_(config) { config_.validate(); }

Proposal RuleBasedPolicy::propose(const RoundHistory& history, const std::vector<BucketCatalog>& catalogs) const {
  const RoundRecord& latest = history.latest();
  const PolicyConfig& cfg = config_;
  Proposal out;
  auto note = [&](std::string rule, std::string detail) { out.rationale.push_back({std::move(rule), std::move(detail)}); };

  Mixture mix = enforce_floors(latest.action.mixture, cfg.dataset_floor);
  if (mix != latest.action.mixture) note("floors", fmt::format("raised to floor {}: {}", cfg.dataset_floor, fmt_mix(mix)));

  Mixture deficit{};
  for (Dimension d : kAllDimensions) deficit[index_of(d)] = cfg.target[index_of(d)] - latest.metric[d];

  // Regressions of the latest round against the point before it.
  Mixture drop{};
  bool regressed = false;
  const auto prev_metric = history.previous_metric();
  if (prev_metric) {
    for (Dimension d : kAllDimensions) {
      drop[index_of(d)] = (*prev_metric)[d] - latest.metric[d];
      if (drop[index_of(d)] > cfg.regression_guard) regressed = true;
    }
  }

  if (regressed) {
    const std::size_t worst = argmax(drop);
    const Dimension wd = kAllDimensions[worst];
    if (history.size() >= 2) {
      const Mixture& before = history.rounds()[history.size() - 2].action.mixture;
      Mixture restored{};
      for (std::size_t i = 0; i < 3; ++i) restored[i] = 0.5 * (mix[i] + before[i]);
      restored = enforce_floors(restored, cfg.dataset_floor);
      note("regression_guard",
           fmt::format("{} dropped {:.4f} > {}; restoring half of the last move: {} -> {}", to_string(wd),
                       drop[worst], cfg.regression_guard, fmt_mix(mix), fmt_mix(restored)));
      mix = restored;
    } else {
      Mixture gain{};
      for (std::size_t i = 0; i < 3; ++i) gain[i] = -drop[i];
      const std::size_t donor = argmax(gain, worst);
      const Mixture before = mix;
      const double moved = transfer(mix, worst, {donor}, {1.0}, cfg.max_ratio_step, cfg.dataset_floor);
      note("regression_guard",
           fmt::format("{} dropped {:.4f} > {} with no prior action; moved {:.4f} from {} (largest gain) to {}: {} -> {}",
                       to_string(wd), drop[worst], cfg.regression_guard, moved, to_string(kAllDatasets[donor]),
                       to_string(kAllDatasets[worst]), fmt_mix(before), fmt_mix(mix)));
    }
  } else {
    const std::size_t receiver = argmax(deficit);
    if (deficit[receiver] > 0.0) {
      std::vector<std::size_t> donors;
      std::vector<double> weights;
      for (std::size_t i = 0; i < 3; ++i) {
        if (i == receiver) continue;
        donors.push_back(i);
        weights.push_back(deficit[receiver] - deficit[i]);
      }
      const Mixture before = mix;
      const double moved = transfer(mix, receiver, donors, weights, cfg.max_ratio_step, cfg.dataset_floor);
      note("deficit_step", fmt::format("largest deficit {} = {:.4f}; moved {:.4f} toward {}: {} -> {}",
                                       to_string(kAllDimensions[receiver]), deficit[receiver], moved,
                                       to_string(kAllDatasets[receiver]), fmt_mix(before), fmt_mix(mix)));
    } else {
      note("deficit_step", "all dimensions at or above target; mixture unchanged");
    }
  }
  out.action.mixture = mix;

  // Bucket weights from fail mass.
  for (const auto& catalog : catalogs) {
    const Dimension dim = dimension_of(catalog.dataset);
    std::map<std::string, double> fail_mass;
    double total = 0.0;
    for (const auto& p : latest.profiles) {
      if (p.dimension != dim) continue;
      fail_mass[p.slice_key()] = p.fail_mass();
      total += p.fail_mass();
    }
    std::map<std::string, double> weights;
    if (total > 0.0) {
      const double smoothing = cfg.smoothing_fraction * total;
      double sum = 0.0;
      for (const auto& b : catalog.buckets) {
        const auto it = fail_mass.find(slice_id(b.slice));
        weights[b.bucket_id] = (it != fail_mass.end() ? it->second : 0.0) + smoothing;
        sum += weights[b.bucket_id];
      }
      for (auto& [_, w] : weights) w /= sum;
      const auto ranked = rank_slices(
          [&] {
            std::vector<FailureProfile> v;
            for (const auto& p : latest.profiles) {
              if (p.dimension == dim) v.push_back(p);
            }
            return v;
          }());
      note("bucket_weights", fmt::format("{}: fail-mass weights (total {:.4f}, smoothing {:.4f}); top slice {}",
                                         to_string(catalog.dataset), total, smoothing,
                                         ranked.empty() ? "-" : ranked.front().slice_key()));
    } else if (const auto it = latest.action.bucket_weights.find(catalog.dataset);
               it != latest.action.bucket_weights.end() && !it->second.empty()) {
      weights = it->second;
      note("bucket_weights", fmt::format("{}: no failures observed; weights carried over", to_string(catalog.dataset)));
    } else {
      for (const auto& b : catalog.buckets) weights[b.bucket_id] = 1.0 / static_cast<double>(catalog.buckets.size());
      note("bucket_weights", fmt::format("{}: no failures observed; uniform weights", to_string(catalog.dataset)));
    }
    if (!weights.empty()) out.action.bucket_weights[catalog.dataset] = std::move(weights);
  }

  // Focus criteria.
  for (Dimension d : kAllDimensions) {
    if (deficit[index_of(d)] <= 0.0) continue;
    std::vector<FailureProfile> dim_profiles;
    for (const auto& p : latest.profiles) {
      if (p.dimension == d) dim_profiles.push_back(p);
    }
    const auto ranked = rank_slices(dim_profiles);
    const auto worst = std::find_if(ranked.begin(), ranked.end(),
                                    [](const FailureProfile& p) { return p.fail_mass() > 0.0 && !p.breakdown.empty(); });
    if (worst == ranked.end()) continue;
    const std::string mode = top_mode(*worst);
    FocusCriterion c;
    c.label = fmt::format("{}:{}:{}", to_string(d), worst->slice_key(), mode);
    c.predicate.push_back({"dataset", PredicateOp::Eq, std::string(to_string(dataset_of(d)))});
    for (const auto& [axis, value] : worst->slice) c.predicate.push_back({axis, PredicateOp::Eq, value});
    c.boost = cfg.focus_boost;
    c.cap_fraction = cfg.focus_cap;

    const bool was_active = std::any_of(latest.action.focus.begin(), latest.action.focus.end(),
                                        [&](const FocusCriterion& f) { return f.label == c.label; });
    if (was_active && drop[index_of(d)] > cfg.regression_guard) {
      note("focus_dropped", fmt::format("{} was active while {} dropped {:.4f}", c.label, to_string(d), drop[index_of(d)]));
      continue;
    }
    note("focus", fmt::format("{} (fail_mass {:.4f}, mode count {})", c.label, worst->fail_mass(), worst->breakdown.at(mode)));
    out.action.focus.push_back(std::move(c));
  }

  out.action.validate(catalogs);
  return out;
}

Proposal propose(const RoundHistory& history, const PolicyConfig& config, const std::vector<BucketCatalog>& catalogs) {
  return RuleBasedPolicy(config).propose(history, catalogs);
}

}  // namespace mixsearch
