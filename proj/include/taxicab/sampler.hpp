#pragma once

#include <functional>
#include <vector>

#include "taxicab/rng.hpp"

namespace taxicab {

// Log unnormalized target mass over integer vectors; -inf outside support.
using DiscreteTarget = std::function<double(const std::vector<long>&)>;
using DiscreteTarget1d = std::function<double(long)>;

// Enumerated L-infinity ball of radius m around an integer vector.
// Enumeration order is lexicographic by coordinate offset, which makes runs
// bit-reproducible for a fixed seed.
struct Neighborhood {
  std::vector<long> center;
  long radius = 1;

  long cardinality() const;  // (2m+1)^B
  std::vector<std::vector<long>> elements() const;
  bool contains(const std::vector<long>& u) const;
};

// U uniform on the ball around lambda, each coordinate independent.
// Radius must be >= 1: a zero radius makes the induced chain non-ergodic.
std::vector<long> draw_auxiliary(Rng& rng, const std::vector<long>& lambda, long m);

// Draw from the target restricted to the ball around u, normalized by exact
// enumeration of the (2m+1)^B candidates in log space. Throws when every
// candidate has zero mass (cannot happen for a u produced by draw_auxiliary
// from a feasible state; surfacing it catches caller bugs).
std::vector<long> tc_slice_draw(Rng& rng, const std::vector<long>& u, long m,
                                const DiscreteTarget& target);

struct TcState {
  std::vector<long> lambda;
  std::vector<long> u;
};

// Ordered two-part Gibbs step: refresh the auxiliary, then draw the parameter
// from the slice. No accept-reject.
TcState tc_step(Rng& rng, const TcState& state, long m, const DiscreteTarget& target);

// Sequential two-part steps over blocks of coordinates, each conditioning on
// all other blocks at their latest values. blocks must partition {0..B-1}.
std::vector<long> tc_blocked_step(Rng& rng, const std::vector<long>& lambda,
                                  const std::vector<std::vector<int>>& blocks,
                                  const std::vector<long>& block_radius,
                                  const DiscreteTarget& target);

// Random-walk Metropolis-Hastings baseline: propose uniformly on the ball
// minus the current point, accept with min{1, ratio}.
std::vector<long> mh_rw_step(Rng& rng, const std::vector<long>& lambda, long radius,
                             const DiscreteTarget& target);

// Scalar fast paths.
long draw_auxiliary_1d(Rng& rng, long lambda, long m);
long tc_slice_draw_1d(Rng& rng, long u, long m, const DiscreteTarget1d& target);
long tc_step_1d(Rng& rng, long lambda, long m, const DiscreteTarget1d& target);
long mh_rw_step_1d(Rng& rng, long lambda, long radius, const DiscreteTarget1d& target);

// Exact marginal transition kernel over a finite support, obtained by summing
// the bivariate (auxiliary, parameter) kernel over all auxiliary values.
// support must be non-empty and hold every state of positive target mass;
// rows sum to 1. Single-threaded brute-force oracle, not a production path.
std::vector<std::vector<double>> marginal_kernel_matrix(const std::vector<long>& support,
                                                        const DiscreteTarget1d& log_target,
                                                        long m);

}  // namespace taxicab
