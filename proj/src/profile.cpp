#include "mixsearch/profile.hpp"

#include <fmt/format.h>

#include <algorithm>
#include <tuple>

namespace mixsearch {

MetricVector metric_vector(std::span<const EvalRecord> records) {
  std::array<double, 3> sum{};
  std::array<std::size_t, 3> count{};
  for (const auto& r : records) {
    if (!r.valid) continue;
    sum[index_of(r.dimension)] += r.score;
    ++count[index_of(r.dimension)];
  }
  MetricVector m;
  for (Dimension d : kAllDimensions) {
    if (count[index_of(d)] == 0) {
      throw DataError(fmt::format("metric undefined: dimension {} has no valid records", to_string(d)));
    }
    m[d] = sum[index_of(d)] / static_cast<double>(count[index_of(d)]);
  }
  return m;
}

std::vector<FailureProfile> build_failure_profiles(std::span<const EvalRecord> records, double fail_threshold) {
  struct Acc {
    FailureProfile profile;
    double score_sum = 0.0;
    double weighted_sum = 0.0;
  };
  std::map<std::pair<Dimension, std::string>, Acc> groups;
  for (const auto& r : records) {
    if (!r.valid) continue;
    auto& acc = groups[{r.dimension, slice_id(r.slice)}];
    auto& p = acc.profile;
    p.dimension = r.dimension;
    p.slice = r.slice;
    ++p.sample_count;
    p.weight_mass += r.weight;
    acc.score_sum += r.score;
    acc.weighted_sum += r.weight * r.score;
    if (r.score < fail_threshold) {
      ++p.failed_count;
      ++p.breakdown[std::string(to_string(r.l2_state))];
      for (const auto& c : r.checks.checks) {
        if (!c.passed) ++p.breakdown[c.id];
      }
    }
  }
  std::vector<FailureProfile> out;
  out.reserve(groups.size());
  for (auto& [_, acc] : groups) {
    auto& p = acc.profile;
    const auto n = static_cast<double>(p.sample_count);
    p.mean_score = acc.score_sum / n;
    p.fail_rate = static_cast<double>(p.failed_count) / n;
    p.weighted_mean = p.weight_mass > 0.0 ? acc.weighted_sum / p.weight_mass : p.mean_score;
    out.push_back(std::move(p));
  }
  return out;
}

std::vector<FailureProfile> rank_slices(std::span<const FailureProfile> profiles, RankingPolicy policy) {
  std::vector<FailureProfile> out(profiles.begin(), profiles.end());
  auto priority = [policy](const FailureProfile& p) {
    return policy == RankingPolicy::FailMass ? p.fail_mass() : p.fail_rate;
  };
  std::stable_sort(out.begin(), out.end(), [&](const FailureProfile& a, const FailureProfile& b) {
    const double pa = priority(a);
    const double pb = priority(b);
    if (pa != pb) return pa > pb;
    if (a.mean_score != b.mean_score) return a.mean_score < b.mean_score;
    return a.slice_key() < b.slice_key();
  });
  return out;
}

Json to_json(const FailureProfile& p) {
  return {{"dimension", to_string(p.dimension)},
          {"slice", p.slice},
          {"slice_id", p.slice_key()},
          {"mean_score", p.mean_score},
          {"fail_rate", p.fail_rate},
          {"breakdown", p.breakdown},
          {"sample_count", p.sample_count},
          {"failed_count", p.failed_count},
          {"weight_mass", p.weight_mass},
          {"weighted_mean", p.weighted_mean},
          {"fail_mass", p.fail_mass()}};
}

FailureProfile profile_from_json(const Json& j) {
  FailureProfile p;
  try {
    p.dimension = parse_dimension(j.at("dimension").get<std::string>());
    p.slice = j.at("slice").get<SliceDescriptor>();
    p.mean_score = j.at("mean_score").get<double>();
    p.fail_rate = j.at("fail_rate").get<double>();
    p.breakdown = j.at("breakdown").get<std::map<std::string, std::int64_t>>();
    p.sample_count = j.at("sample_count").get<std::uint64_t>();
    p.failed_count = j.value("failed_count", std::uint64_t{0});
    p.weight_mass = j.at("weight_mass").get<double>();
    p.weighted_mean = j.value("weighted_mean", p.mean_score);
  } catch (const Json::exception& e) {
    throw DataError(fmt::format("malformed failure profile: {}", e.what()));
  }
  return p;
}

Json to_json(const MetricVector& m) {
  Json j = Json::object();
  for (Dimension d : kAllDimensions) j[std::string(to_string(d))] = m[d];
  return j;
}

MetricVector metric_from_json(const Json& j) {
  MetricVector m;
  try {
    for (Dimension d : kAllDimensions) m[d] = j.at(std::string(to_string(d))).get<double>();
  } catch (const Json::exception& e) {
    throw DataError(fmt::format("malformed metric vector: {}", e.what()));
  }
  return m;
}

}  // namespace mixsearch
