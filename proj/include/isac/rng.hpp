#pragma once

#include <complex>
#include <cstdint>
#include <random>
#include <string_view>

namespace isac {

/// Deterministic random source. A master seed plus a (name, index) pair
/// yields an independent substream; the mapping is fixed so every artifact
/// produced from a given seed is reproducible byte for byte.
///
/// Variate mappings are implemented here rather than with std::*_distribution
/// so the generated sequences do not depend on the standard library build.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : eng_(seed) {}

  /// Independent stream derived from (seed, name, index).
  static Rng substream(std::uint64_t seed, std::string_view name,
                       std::uint64_t index = 0);

  std::uint64_t next_u64() { return eng_(); }

  /// Uniform on [0, 1).
  double uniform();
  /// Uniform on [lo, hi).
  double uniform(double lo, double hi);
  /// Standard normal via Box-Muller.
  double normal();
  /// Circularly symmetric complex normal, unit variance.
  std::complex<double> cnormal();
  /// Uniform integer in [0, n).
  std::uint64_t below(std::uint64_t n);

 private:
  std::mt19937_64 eng_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

/// 64-bit FNV-1a, used to derive named substreams.
std::uint64_t fnv1a(std::string_view s);

/// SplitMix64 finalizer, used to decorrelate combined seeds.
std::uint64_t mix64(std::uint64_t x);

}  // namespace isac
