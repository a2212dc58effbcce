#pragma once

#include "taxicab/rng.hpp"

namespace taxicab {

// Symmetric integer pmf: a linear "tent" of half-width k_eff around lambda
// carrying mass 1-2t, plus a geometric tail of mass t on each side.
struct TentParams {
  long lambda = 0;  // mode
  long k_eff = 0;   // half-width of the tent body, >= 0
  double t = 0.0;   // per-tail mass, in [0, 0.5)

  void validate() const;

  // Geometric tail rate min{0.99, (1-2t) / (t (k_eff+1)^2)}. Requires t > 0.
  double p_star() const;
};

double tent_log_pmf(long y, const TentParams& p);

// Three-way mixture draw: tent body with probability 1-2t (sum of two uniforms
// on {0..k_eff}, recentred), each tail with probability t as
// lambda +/- (k_eff + 1 + Geometric(p_star)).
long tent_sample(Rng& rng, const TentParams& p);

// floor(e^k) for k >= 0; 0 for k < 0. Throws std::overflow_error past the
// 64-bit range (k > 43).
long effective_scale(long k);

// 0 for lambda <= 1, log(lambda) otherwise. Throws on negative input.
double nonneg_log(long lambda);

}  // namespace taxicab
