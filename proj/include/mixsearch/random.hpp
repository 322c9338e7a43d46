#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace mixsearch {

/// Seeded random stream. Owned per call, never shared between threads.
///
/// Only the raw mt19937_64 output is used; uniform and normal variates are
/// derived here rather than through <random> distributions, whose algorithms
/// are implementation-defined. That keeps draws identical across standard
/// libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next() { return engine_(); }

  /// Uniform in [0, 1) with 53 bits of precision.
  double uniform() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Uniform integer in [0, n). n must be positive.
  std::uint64_t below(std::uint64_t n);

  /// Standard normal via Box-Muller (one value per call).
  double normal();

 private:
  std::mt19937_64 engine_;
};

std::uint64_t splitmix64(std::uint64_t x);

/// FNV-1a 64-bit hash; used only for seed derivation.
std::uint64_t fnv1a64(std::string_view bytes);

/// Child seed for a pipeline stage:
///   splitmix64(master ^ fnv1a64(stage) ^ splitmix64(index + 1)).
std::uint64_t derive_seed(std::uint64_t master, std::string_view stage, std::int64_t index);

/// Lower-case hex SHA-256 of `bytes`.
std::string sha256_hex(std::string_view bytes);

}  // namespace mixsearch
