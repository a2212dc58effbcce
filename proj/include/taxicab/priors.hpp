#pragma once

#include "taxicab/tent.hpp"

namespace taxicab {

// Discrete uniform prior on the leaf location parameter, DU{d1..d2}.
struct LocationPrior {
  long d1 = 0;
  long d2 = 0;

  void validate() const;
  double log_pmf(long lambda) const;  // -log(d2-d1+1) on support, -inf outside
};

// Tent prior on the raw leaf scale parameter. Its location halves with node
// depth and its half-width shrinks as (1+depth)^{-beta_k}.
struct ScalePrior {
  long kappa = 0;       // >= 0
  double beta_k = 1.0;  // >= 0
  double t_k = 0.025;   // in [0, 0.5)

  void validate() const;

  // The prior tent for a node at the given depth whose location parameter is
  // lambda: location floor(kappa / 2^depth), half-width
  // floor(nonneg_log(lambda) / (1+depth)^beta_k).
  TentParams at(long lambda, int depth) const;

  double log_pmf(long k, long lambda, int depth) const;
};

}  // namespace taxicab
