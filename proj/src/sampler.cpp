#include "mixsearch/sampler.hpp"

#include "mixsearch/random.hpp"

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <numeric>
#include <optional>

namespace mixsearch {

namespace {

std::optional<double> parse_number(std::string_view s) {
  double v = 0.0;
  const auto [ptr, ec] = std::from_chars(s.data(), s.data() + s.size(), v);
  if (ec != std::errc() || ptr != s.data() + s.size()) return std::nullopt;
  return v;
}

std::string_view op_symbol(PredicateOp op) {
  switch (op) {
    case PredicateOp::Eq: return "==";
    case PredicateOp::Ne: return "!=";
    case PredicateOp::Lt: return "<";
    case PredicateOp::Le: return "<=";
    case PredicateOp::Gt: return ">";
    case PredicateOp::Ge: return ">=";
  }
  return "?";
}

PredicateOp parse_op(std::string_view s) {
  for (auto op : {PredicateOp::Eq, PredicateOp::Ne, PredicateOp::Lt, PredicateOp::Le, PredicateOp::Gt, PredicateOp::Ge}) {
    if (op_symbol(op) == s) return op;
  }
  throw DataError(fmt::format("unknown predicate operator '{}'", s));
}

}  // namespace

bool TagPredicate::matches(const TrainingWindow& w) const {
  std::string_view actual;
  if (key == "dataset") {
    actual = to_string(w.dataset);
  } else if (key == "bucket") {
    actual = w.bucket_id;
  } else {
    const auto it = w.tags.find(key);
    if (it == w.tags.end()) return op == PredicateOp::Ne;
    actual = it->second;
  }
  switch (op) {
    case PredicateOp::Eq: return actual == value;
    case PredicateOp::Ne: return actual != value;
    default: break;
  }
  const auto a = parse_number(actual);
  const auto b = parse_number(value);
  if (!a || !b) return false;
  switch (op) {
    case PredicateOp::Lt: return *a < *b;
    case PredicateOp::Le: return *a <= *b;
    case PredicateOp::Gt: return *a > *b;
    case PredicateOp::Ge: return *a >= *b;
    default: return false;
  }
}

bool FocusCriterion::matches(const TrainingWindow& w) const {
  return std::all_of(predicate.begin(), predicate.end(), [&](const TagPredicate& p) { return p.matches(w); });
}

void DataAction::validate() const {
  double sum = 0.0;
  for (double m : mixture) {
    if (!(m >= 0.0)) throw ConfigError("action mixture has a negative or NaN share");
    sum += m;
  }
  if (std::abs(sum - 1.0) > kSimplexTolerance) {
    throw ConfigError(fmt::format("action mixture sums to {:.12f}, expected 1", sum));
  }
  for (const auto& [ds, weights] : bucket_weights) {
    if (weights.empty()) continue;
    double wsum = 0.0;
    for (const auto& [bucket, w] : weights) {
      if (!(w >= 0.0)) throw ConfigError(fmt::format("bucket weight for {}/{} is negative", to_string(ds), bucket));
      wsum += w;
    }
    if (std::abs(wsum - 1.0) > kSimplexTolerance) {
      throw ConfigError(fmt::format("bucket weights of {} sum to {:.12f}, expected 1", to_string(ds), wsum));
    }
  }
  for (const auto& f : focus) {
    if (!(f.boost >= 1.0)) throw ConfigError(fmt::format("focus '{}' has boost {} < 1", f.label, f.boost));
    if (!(f.cap_fraction > 0.0 && f.cap_fraction <= 1.0)) {
      throw ConfigError(fmt::format("focus '{}' has cap_fraction {} outside (0, 1]", f.label, f.cap_fraction));
    }
  }
}

void DataAction::validate(const std::vector<BucketCatalog>& catalogs) const {
  validate();
  for (const auto& [ds, weights] : bucket_weights) {
    const BucketCatalog* cat = nullptr;
    for (const auto& c : catalogs) {
      if (c.dataset == ds) cat = &c;
    }
    for (const auto& [bucket, _] : weights) {
      if (cat == nullptr || cat->find(bucket) == nullptr) {
        throw ConfigError(fmt::format("action references unknown bucket {}/{}", to_string(ds), bucket));
      }
    }
  }
}

std::map<Dataset, std::map<std::string, double>> uniform_bucket_weights(const std::vector<BucketCatalog>& catalogs) {
  std::map<Dataset, std::map<std::string, double>> out;
  for (const auto& c : catalogs) {
    if (c.buckets.empty()) continue;
    const double w = 1.0 / static_cast<double>(c.buckets.size());
    for (const auto& b : c.buckets) out[c.dataset][b.bucket_id] = w;
  }
  return out;
}

BucketDistribution effective_distribution(const DataAction& action, const Pool& pool) {
  action.validate();
  BucketDistribution dist;

  for (Dataset ds : kAllDatasets) {
    const double share = action.mixture[index_of(ds)];
    if (share <= 0.0) continue;
    if (!pool.has_dataset(ds)) {
      throw ConfigError(fmt::format("action infeasible: {} has share {} but is not in the pool", to_string(ds), share));
    }
    const auto& catalog = pool.catalog(ds);
    std::map<std::string, double> weights;
    if (const auto it = action.bucket_weights.find(ds); it != action.bucket_weights.end() && !it->second.empty()) {
      weights = it->second;
    } else {
      for (const auto& b : catalog.buckets) weights[b.bucket_id] = 1.0;
    }
    // Empty buckets drop out; the dataset keeps its share.
    double live = 0.0;
    for (const auto& [bucket, w] : weights) {
      if (w > 0.0 && !pool.members({ds, bucket}).empty()) live += w;
    }
    if (live <= 0.0) {
      throw ConfigError(fmt::format("action infeasible: {} has share {} but no non-empty bucket with positive weight",
                                    to_string(ds), share));
    }
    for (const auto& [bucket, w] : weights) {
      if (w > 0.0 && !pool.members({ds, bucket}).empty()) dist.probability[{ds, bucket}] = share * w / live;
    }
  }

  for (const auto& criterion : action.focus) {
    FocusBuckets fb{criterion.label, criterion.cap_fraction, {}};
    for (auto& [key, p] : dist.probability) {
      const auto members = pool.members(key);
      const bool all = std::all_of(members.begin(), members.end(),
                                   [&](std::size_t i) { return criterion.matches(pool.window(i)); });
      if (all) {
        p *= criterion.boost;
        fb.buckets.insert(key);
      }
    }
    dist.focus.push_back(std::move(fb));
  }

  double total = 0.0;
  for (const auto& [_, p] : dist.probability) total += p;
  for (auto& [_, p] : dist.probability) p /= total;
  return dist;
}

SampleManifest draw_budgeted(const BucketDistribution& dist, const Pool& pool, std::uint64_t budget_tokens,
                             std::uint64_t seed) {
  if (budget_tokens < 1) throw ConfigError("budget must be positive");
  std::vector<BucketKey> keys;
  std::vector<double> prob;
  std::uint64_t min_window = UINT64_MAX;
  for (const auto& [key, p] : dist.probability) {
    if (p <= 0.0) continue;
    if (pool.members(key).empty()) throw ContractError(fmt::format("bucket {} on the support is empty", key.str()));
    keys.push_back(key);
    prob.push_back(p);
    min_window = std::min(min_window, pool.min_tokens(key));
  }
  if (keys.empty()) throw ContractError("distribution has empty support");
  if (budget_tokens < min_window) {
    throw DataError(fmt::format("empty manifest: budget {} is smaller than every window on the support (min {})",
                                budget_tokens, min_window));
  }

  SampleManifest out;
  out.budget_tokens = budget_tokens;
  out.seed = seed;
  out.effective_distribution = dist.probability;

  // Caps per criterion, and which criteria govern each support bucket.
  std::vector<std::uint64_t> cap(dist.focus.size());
  out.focus_tokens.assign(dist.focus.size(), 0);
  std::vector<std::vector<std::size_t>> governed(keys.size());
  for (std::size_t f = 0; f < dist.focus.size(); ++f) {
    cap[f] = static_cast<std::uint64_t>(std::floor(dist.focus[f].cap_fraction * static_cast<double>(budget_tokens)));
    for (std::size_t k = 0; k < keys.size(); ++k) {
      if (dist.focus[f].buckets.contains(keys[k])) governed[k].push_back(f);
    }
  }
  std::vector<std::uint64_t> bucket_min(keys.size());
  for (std::size_t k = 0; k < keys.size(); ++k) bucket_min[k] = pool.min_tokens(keys[k]);

  auto closed_by_cap = [&](std::size_t k) {
    for (std::size_t f : governed[k]) {
      if (out.focus_tokens[f] + bucket_min[k] > cap[f]) return true;
    }
    return false;
  };

  std::vector<bool> open(keys.size(), true);
  for (std::size_t k = 0; k < keys.size(); ++k) open[k] = !closed_by_cap(k);

  Rng rng(seed);
  while (true) {
    double open_mass = 0.0;
    std::size_t last_open = keys.size();
    for (std::size_t k = 0; k < keys.size(); ++k) {
      if (open[k]) {
        open_mass += prob[k];
        last_open = k;
      }
    }
    if (last_open == keys.size()) {
      out.stop_reason = StopReason::CapExhausted;
      break;
    }
    const double u = rng.uniform() * open_mass;
    std::size_t pick = last_open;
    double acc = 0.0;
    for (std::size_t k = 0; k < keys.size(); ++k) {
      if (!open[k]) continue;
      acc += prob[k];
      if (u < acc) {
        pick = k;
        break;
      }
    }
    const auto members = pool.members(keys[pick]);
    const std::size_t wi = members[rng.below(members.size())];
    const auto& w = pool.window(wi);

    bool over_cap = false;
    for (std::size_t f : governed[pick]) {
      if (out.focus_tokens[f] + w.token_count > cap[f]) over_cap = true;
    }
    if (over_cap) {
      ++out.cap_rejections;
      if (closed_by_cap(pick)) open[pick] = false;
      continue;
    }
    if (out.total_tokens + w.token_count > budget_tokens) {
      out.stop_reason = StopReason::Overflow;
      out.overflow_tokens = w.token_count;
      break;
    }
    out.total_tokens += w.token_count;
    for (std::size_t f : governed[pick]) {
      out.focus_tokens[f] += w.token_count;
    }
    out.entries.push_back({wi, w.window_id, w.dataset, w.bucket_id, w.token_count});
    // Admitting tokens can close other buckets sharing a criterion.
    if (!governed[pick].empty()) {
      for (std::size_t k = 0; k < keys.size(); ++k) {
        if (open[k] && closed_by_cap(k)) open[k] = false;
      }
    }
  }
  return out;
}

std::array<std::uint64_t, 3> SampleManifest::dataset_tokens() const {
  std::array<std::uint64_t, 3> out{};
  for (const auto& e : entries) out[index_of(e.dataset)] += e.token_count;
  return out;
}

std::map<BucketKey, std::uint64_t> SampleManifest::bucket_tokens() const {
  std::map<BucketKey, std::uint64_t> out;
  for (const auto& e : entries) out[{e.dataset, e.bucket_id}] += e.token_count;
  return out;
}

std::string SampleManifest::to_jsonl() const {
  std::string out;
  for (const auto& e : entries) {
    Json j = {{"window_id", e.window_id},
              {"dataset", to_string(e.dataset)},
              {"bucket", e.bucket_id},
              {"token_count", e.token_count}};
    out += j.dump();
    out += '\n';
  }
  return out;
}

Json SampleManifest::summary() const {
  Json dist = Json::object();
  for (const auto& [key, p] : effective_distribution) dist[key.str()] = p;
  Json tokens = Json::object();
  const auto per_ds = dataset_tokens();
  for (Dataset d : kAllDatasets) tokens[std::string(to_string(d))] = per_ds[index_of(d)];
  return {{"seed", seed},
          {"budget_tokens", budget_tokens},
          {"total_tokens", total_tokens},
          {"window_count", entries.size()},
          {"dataset_tokens", tokens},
          {"effective_distribution", dist},
          {"stop_reason", to_string(stop_reason)},
          {"overflow_tokens", overflow_tokens},
          {"cap_rejections", cap_rejections},
          {"focus_tokens", focus_tokens},
          {"digest", digest()}};
}

std::string SampleManifest::digest() const { return sha256_hex(to_jsonl()); }

std::string_view to_string(StopReason r) {
  return r == StopReason::Overflow ? "overflow" : "cap_exhausted";
}

Json to_json(const FocusCriterion& c) {
  Json preds = Json::array();
  for (const auto& p : c.predicate) preds.push_back({{"key", p.key}, {"op", op_symbol(p.op)}, {"value", p.value}});
  return {{"label", c.label}, {"predicate", preds}, {"boost", c.boost}, {"cap_fraction", c.cap_fraction}};
}

FocusCriterion focus_from_json(const Json& j) {
  FocusCriterion c;
  c.label = j.value("label", "");
  for (const auto& p : j.at("predicate")) {
    c.predicate.push_back({p.at("key").get<std::string>(), parse_op(p.value("op", "==")), p.at("value").get<std::string>()});
  }
  c.boost = j.value("boost", 2.0);
  c.cap_fraction = j.value("cap_fraction", 0.25);
  return c;
}

Json to_json(const DataAction& action) {
  Json mix = Json::object();
  for (Dataset d : kAllDatasets) mix[std::string(to_string(d))] = action.mixture[index_of(d)];
  Json weights = Json::object();
  for (const auto& [ds, w] : action.bucket_weights) weights[std::string(to_string(ds))] = w;
  Json focus = Json::array();
  for (const auto& f : action.focus) focus.push_back(to_json(f));
  return {{"mixture", mix}, {"bucket_weights", weights}, {"focus", focus}};
}

DataAction action_from_json(const Json& j) {
  DataAction a;
  try {
    const Json& mix = j.at("mixture");
    if (mix.is_array()) {
      if (mix.size() != 3) throw ConfigError("mixture array must have 3 entries (XGUARD, ORBENCH, IF)");
      for (std::size_t i = 0; i < 3; ++i) a.mixture[i] = mix[i].get<double>();
    } else {
      for (Dataset d : kAllDatasets) a.mixture[index_of(d)] = mix.value(std::string(to_string(d)), 0.0);
    }
    if (j.contains("bucket_weights")) {
      for (const auto& [ds, w] : j.at("bucket_weights").items()) {
        a.bucket_weights[parse_dataset(ds)] = w.get<std::map<std::string, double>>();
      }
    }
    if (j.contains("focus")) {
      for (const auto& f : j.at("focus")) a.focus.push_back(focus_from_json(f));
    }
  } catch (const Json::exception& e) {
    throw ConfigError(fmt::format("invalid action: {}", e.what()));
  }
  return a;
}

}  // namespace mixsearch
