#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace taxicab {

using Rng = std::mt19937_64;

inline Rng make_rng(std::uint64_t seed) { return Rng(seed); }

// Uniform integer on [lo, hi], inclusive.
inline long uniform_int(Rng& rng, long lo, long hi) {
  return std::uniform_int_distribution<long>(lo, hi)(rng);
}

// Uniform on [0, 1).
inline double uniform_real(Rng& rng) {
  return std::uniform_real_distribution<double>(0.0, 1.0)(rng);
}

inline bool bernoulli(Rng& rng, double p) { return uniform_real(rng) < p; }

// Beta(a, b) via two gamma draws.
inline double beta_draw(Rng& rng, double a, double b) {
  std::gamma_distribution<double> ga(a, 1.0);
  std::gamma_distribution<double> gb(b, 1.0);
  double x = ga(rng);
  double y = gb(rng);
  return x / (x + y);
}

// Number of failures before the first success of a p-coin.
inline long geometric_draw(Rng& rng, double p) {
  if (p >= 1.0) return 0;
  double u = uniform_real(rng);
  return static_cast<long>(std::floor(std::log1p(-u) / std::log1p(-p)));
}

}  // namespace taxicab
