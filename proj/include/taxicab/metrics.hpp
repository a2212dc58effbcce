#pragma once

#include <functional>
#include <limits>
#include <map>
#include <vector>

namespace taxicab {

// Normalized pmf over integer states.
using Pmf = std::map<long, double>;

// Pseudo-state carrying the truncated tail deficit of an infinite-support
// truth pmf, so that normalization is preserved. Excluded from parity
// conditionals.
inline constexpr long kOverflowState = std::numeric_limits<long>::max();

Pmf empirical_pmf(const std::map<long, long>& visit_counts);

// Normalized truncation of a log-unnormalized target on {start, start+1, ...}.
// States are kept while cumulative mass < 1 - 1e-12 and state mass > 1e-15;
// the deficit goes to kOverflowState.
Pmf truncated_pmf(const std::function<double(long)>& log_unnorm, long start = 0);

double tv_distance(const Pmf& p, const Pmf& q);
double hellinger_distance(const Pmf& p, const Pmf& q);

enum class Parity { even, odd };
enum class DistanceKind { tv, hellinger };

// Renormalize both pmfs on the parity class, then apply the distance.
// Throws when either conditioned mass is zero.
double conditional_distance(const Pmf& p, const Pmf& q, Parity parity, DistanceKind kind);

// Mean over posterior draws and observations of |g_hat - y|.
double mae(const std::vector<std::vector<double>>& g_draws, const std::vector<long>& y);

// Mean over posterior draws of the Euclidean norm of (g_hat - g_true).
// With posterior_mean = true, a single norm of the posterior-mean fit instead.
double l2_norm(const std::vector<std::vector<double>>& g_draws, const std::vector<long>& g_true,
               bool posterior_mean = false);

}  // namespace taxicab
