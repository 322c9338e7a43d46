#pragma once

#include <array>
#include <cmath>
#include <cstdint>
#include <map>
#include <stdexcept>
#include <string>
#include <string_view>

namespace mixsearch {

/// Training sources. Order is the canonical mixture order (x / o / i).
enum class Dataset : std::uint8_t { XGuard = 0, OrBench = 1, IF = 2 };

/// Capability dimensions, one per dataset.
enum class Dimension : std::uint8_t { Safe = 0, Benign = 1, IF = 2 };

inline constexpr std::array<Dataset, 3> kAllDatasets{Dataset::XGuard, Dataset::OrBench, Dataset::IF};
inline constexpr std::array<Dimension, 3> kAllDimensions{Dimension::Safe, Dimension::Benign, Dimension::IF};

constexpr std::size_t index_of(Dataset d) { return static_cast<std::size_t>(d); }
constexpr std::size_t index_of(Dimension d) { return static_cast<std::size_t>(d); }
constexpr Dimension dimension_of(Dataset d) { return static_cast<Dimension>(index_of(d)); }
constexpr Dataset dataset_of(Dimension d) { return static_cast<Dataset>(index_of(d)); }

std::string_view to_string(Dataset d);
std::string_view to_string(Dimension d);
Dataset parse_dataset(std::string_view s);
Dimension parse_dimension(std::string_view s);

enum class ErrorKind { Config, Data, Backend, Contract, Fixture };

/// Base of every error the library throws; `kind()` drives CLI exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what) : std::runtime_error(what), kind_(kind) {}
  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error(ErrorKind::Config, what) {}
};

/// Load and schema failures in input files.
class DataError : public Error {
 public:
  explicit DataError(const std::string& what) : Error(ErrorKind::Data, what) {}
};

class BackendError : public Error {
 public:
  explicit BackendError(const std::string& what) : Error(ErrorKind::Backend, what) {}
};

/// Violated precondition of an API call.
class ContractError : public Error {
 public:
  explicit ContractError(const std::string& what) : Error(ErrorKind::Contract, what) {}
};

class FixtureError : public Error {
 public:
  explicit FixtureError(const std::string& what) : Error(ErrorKind::Fixture, what) {}
};

/// Structured slice label. Axes are kept sorted so `id()` is canonical.
using SliceDescriptor = std::map<std::string, std::string>;

/// "axis=value,axis=value" with axes in lexical order.
std::string slice_id(const SliceDescriptor& slice);

// Scores are reported at 4 decimals; comparisons happen on integer ticks.
inline constexpr double kTicksPerUnit = 10000.0;

inline std::int64_t to_ticks(double value) { return std::llround(value * kTicksPerUnit); }
inline double round4(double value) { return static_cast<double>(to_ticks(value)) / kTicksPerUnit; }

/// Per-round headline metric, one unweighted mean per dimension, each in [1, 5].
struct MetricVector {
  std::array<double, 3> values{};

  double& operator[](Dimension d) { return values[index_of(d)]; }
  double operator[](Dimension d) const { return values[index_of(d)]; }
  bool operator==(const MetricVector&) const = default;
};

/// MetricVector quantized to 4-decimal ticks.
struct FixedMetric {
  std::array<std::int64_t, 3> ticks{};

  static FixedMetric from(const MetricVector& m) {
    return {{to_ticks(m.values[0]), to_ticks(m.values[1]), to_ticks(m.values[2])}};
  }
  MetricVector to_metric() const {
    return {{ticks[0] / kTicksPerUnit, ticks[1] / kTicksPerUnit, ticks[2] / kTicksPerUnit}};
  }
  bool operator==(const FixedMetric&) const = default;
};

/// "2.7600" style formatting.
std::string format4(double value);

}  // namespace mixsearch
