#include "mixsearch/common.hpp"

#include <fmt/format.h>

namespace mixsearch {

std::string_view to_string(Dataset d) {
  switch (d) {
    case Dataset::XGuard: return "XGUARD";
    case Dataset::OrBench: return "ORBENCH";
    case Dataset::IF: return "IF";
  }
  return "?";
}

std::string_view to_string(Dimension d) {
  switch (d) {
    case Dimension::Safe: return "SAFE";
    case Dimension::Benign: return "BENIGN";
    case Dimension::IF: return "IF";
  }
  return "?";
}

Dataset parse_dataset(std::string_view s) {
  if (s == "XGUARD") return Dataset::XGuard;
  if (s == "ORBENCH") return Dataset::OrBench;
  if (s == "IF") return Dataset::IF;
  throw DataError(fmt::format("unknown dataset '{}'", s));
}

Dimension parse_dimension(std::string_view s) {
  if (s == "SAFE") return Dimension::Safe;
  if (s == "BENIGN") return Dimension::Benign;
  if (s == "IF") return Dimension::IF;
  throw DataError(fmt::format("unknown dimension '{}'", s));
}

std::string slice_id(const SliceDescriptor& slice) {
  std::string out;
  for (const auto& [axis, value] : slice) {
    if (!out.empty()) out += ',';
    out += axis;
    out += '=';
    out += value;
  }
  return out;
}

std::string format4(double value) { return fmt::format("{:.4f}", round4(value)); }

}  // namespace mixsearch
