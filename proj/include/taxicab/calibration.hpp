#pragma once

#include <map>
#include <vector>

#include "taxicab/metrics.hpp"
#include "taxicab/rng.hpp"
#include "taxicab/tree.hpp"

namespace taxicab {

struct CalibInputs {
  Pmf p_hat;              // empirical pmf of the training responses
  double median = 0.0;    // sample median
  double d_hat = 0.0;     // estimated terminal node depth
  double eps_kappa = 1.5; // stopping tolerance on kappa
  double eps_t = 0.005;   // stopping tolerance on t
  int max_iters = 20;
  double grid_increment = 0.005;
};

Pmf empirical_pmf_of(const std::vector<long>& y);

// Smallest state whose empirical CDF reaches q.
double empirical_quantile(const Pmf& p_hat, double q);

// Mean terminal-node depth over prior tree draws (split probability
// alpha (1+d)^{-beta}, depth capped at 50).
double estimate_depth(double alpha, double beta, long n_draws, Rng& rng);

// Given t: pick kappa so that e^{floor(kappa / 2^d_hat)} brackets the spread
// between the upper (1-t) quantile and the median; fall back to the tightest
// values on either side of the bracket, or a fair coin when the spread is <= 1.
long estimate_kappa(const CalibInputs& in, double t, Rng& rng);

// Given kappa: scan a t grid, build theoretical tent pmfs at the sample
// median, and return the Hellinger-minimizing grid value (ties -> smallest t).
double estimate_t(const CalibInputs& in, long kappa_hat);

// Alternate the two estimators from a grid-search max-likelihood start until
// both stabilize or max_iters is reached.
std::pair<long, double> estimate_kappa_t(const CalibInputs& in, Rng& rng);

// Tent pmf over a support wide enough that the ignored tail mass is < 1e-10,
// for distance work against empirical pmfs.
Pmf tent_pmf_table(long lambda, long k_eff, double t);

// Hellinger between an empirical pmf and a tent, over the union support.
double tent_hellinger(const Pmf& p_hat, long lambda, long k_eff, double t);

}  // namespace taxicab
