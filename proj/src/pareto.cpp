#include "mixsearch/pareto.hpp"

#include "mixsearch/profile.hpp"

#include <fmt/format.h>

#include <algorithm>

namespace mixsearch {

bool dominates(const FixedMetric& a, const FixedMetric& b) {
  bool strict = false;
  for (std::size_t d = 0; d < a.ticks.size(); ++d) {
    if (a.ticks[d] < b.ticks[d]) return false;
    if (a.ticks[d] > b.ticks[d]) strict = true;
  }
  return strict;
}

bool dominates(const MetricVector& a, const MetricVector& b) {
  return dominates(FixedMetric::from(a), FixedMetric::from(b));
}

std::string_view to_string(Verdict v) {
  switch (v) {
    case Verdict::Accepted: return "ACCEPTED";
    case Verdict::Dominated: return "DOMINATED";
    case Verdict::Replaces: return "REPLACES";
  }
  return "?";
}

bool ParetoArchive::contains(const std::string& label) const {
  return std::any_of(entries_.begin(), entries_.end(), [&](const Entry& e) { return e.label == label; });
}

InsertOutcome ParetoArchive::insert(const std::string& label, const MetricVector& m) {
  const bool seen = std::any_of(history_.begin(), history_.end(), [&](const HistoryItem& h) { return h.label == label; });
  if (seen) throw ContractError(fmt::format("archive label '{}' already used", label));

  const FixedMetric fm = FixedMetric::from(m);
  InsertOutcome outcome;
  const bool dominated = std::any_of(entries_.begin(), entries_.end(),
                                     [&](const Entry& e) { return dominates(e.metric, fm); });
  if (dominated) {
    outcome.verdict = Verdict::Dominated;
  } else {
    std::erase_if(entries_, [&](const Entry& e) {
      if (!dominates(fm, e.metric)) return false;
      outcome.replaced.push_back(e.label);
      return true;
    });
    outcome.verdict = outcome.replaced.empty() ? Verdict::Accepted : Verdict::Replaces;
    entries_.push_back({label, fm});
  }
  history_.push_back({label, fm, outcome});
  return outcome;
}

Json ParetoArchive::snapshot() const {
  Json entries = Json::array();
  for (const auto& e : entries_) entries.push_back({{"label", e.label}, {"metric", to_json(e.metric.to_metric())}});
  Json history = Json::array();
  for (const auto& h : history_) {
    history.push_back({{"label", h.label},
                       {"metric", to_json(h.metric.to_metric())},
                       {"verdict", to_string(h.outcome.verdict)},
                       {"replaced", h.outcome.replaced}});
  }
  return {{"entries", entries}, {"history", history}};
}

ParetoArchive ParetoArchive::from_snapshot(const Json& j) {
  // Replaying the history rebuilds the entry set deterministically.
  ParetoArchive a;
  try {
    for (const auto& h : j.at("history")) a.insert(h.at("label").get<std::string>(), metric_from_json(h.at("metric")));
  } catch (const Json::exception& e) {
    throw DataError(fmt::format("malformed archive snapshot: {}", e.what()));
  }
  return a;
}

}  // namespace mixsearch
