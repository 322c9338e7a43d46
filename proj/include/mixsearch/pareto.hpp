#pragma once

#include "mixsearch/common.hpp"
#include "mixsearch/io.hpp"

#include <string>
#include <vector>

namespace mixsearch {

/// a >= b in every dimension and a > b in at least one, compared exactly on
/// 4-decimal ticks.
bool dominates(const FixedMetric& a, const FixedMetric& b);
bool dominates(const MetricVector& a, const MetricVector& b);

enum class Verdict { Accepted, Dominated, Replaces };

std::string_view to_string(Verdict v);

struct InsertOutcome {
  Verdict verdict = Verdict::Accepted;
  /// Labels evicted by the new entry (Replaces only).
  std::vector<std::string> replaced;
};

/// Non-dominated set of labelled metric vectors, in insertion order.
/// Single writer; concurrent reads are safe between writes.
class ParetoArchive {
 public:
  struct Entry {
    std::string label;
    FixedMetric metric;
  };
  struct HistoryItem {
    std::string label;
    FixedMetric metric;
    InsertOutcome outcome;
  };

  /// Throws ContractError when `label` was inserted before.
  InsertOutcome insert(const std::string& label, const MetricVector& m);

  const std::vector<Entry>& entries() const { return entries_; }
  const std::vector<HistoryItem>& history() const { return history_; }
  bool contains(const std::string& label) const;

  Json snapshot() const;
  static ParetoArchive from_snapshot(const Json& j);

 private:
  std::vector<Entry> entries_;
  std::vector<HistoryItem> history_;
};

}  // namespace mixsearch
