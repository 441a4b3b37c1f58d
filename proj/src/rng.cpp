#include "isac/rng.hpp"

#include <cmath>
#include <numbers>

namespace isac {

std::uint64_t fnv1a(std::string_view s) {
  std::uint64_t h = 0xcbf29ce484222325ull;
  for (unsigned char c : s) {
    h ^= c;
    h *= 0x100000001b3ull;
  }
  return h;
}

std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

Rng Rng::substream(std::uint64_t seed, std::string_view name,
                   std::uint64_t index) {
  std::uint64_t s = mix64(seed ^ mix64(fnv1a(name) + 0x632be59bd9b4e019ull * index));
  return Rng(s);
}

double Rng::uniform() {
  // 53 high bits -> double in [0, 1).
  return static_cast<double>(eng_() >> 11) * 0x1.0p-53;
}

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

double Rng::normal() {
  if (have_spare_) {
    have_spare_ = false;
    return spare_;
  }
  double u1 = 1.0 - uniform();  // (0, 1], keeps the log finite
  double u2 = uniform();
  double r = std::sqrt(-2.0 * std::log(u1));
  double a = 2.0 * std::numbers::pi * u2;
  spare_ = r * std::sin(a);
  have_spare_ = true;
  return r * std::cos(a);
}

std::complex<double> Rng::cnormal() {
  double re = normal();
  double im = normal();
  return {re / std::numbers::sqrt2, im / std::numbers::sqrt2};
}

std::uint64_t Rng::below(std::uint64_t n) {
  // Rejection-free modulo is fine here: n is tiny relative to 2^64, and the
  // reproducibility contract only requires a fixed mapping.
  return eng_() % n;
}

}  // namespace isac
