#pragma once

#include <cmath>
#include <limits>
#include <vector>

#include "taxicab/rng.hpp"

namespace taxicab {

inline constexpr double kNegInf = -std::numeric_limits<double>::infinity();

// log(sum_i exp(lw[i])), max-shifted. Returns -inf for an all -inf (or empty) input.
inline double log_sum_exp(const std::vector<double>& lw) {
  double mx = kNegInf;
  for (double v : lw) mx = std::max(mx, v);
  if (mx == kNegInf) return kNegInf;
  double s = 0.0;
  for (double v : lw) {
    if (v != kNegInf) s += std::exp(v - mx);
  }
  return mx + std::log(s);
}

// Exact categorical draw from unnormalized log weights via inverse CDF on the
// exp-normalized list. Returns -1 when every weight is -inf.
inline int categorical_from_log(Rng& rng, const std::vector<double>& lw) {
  double mx = kNegInf;
  for (double v : lw) mx = std::max(mx, v);
  if (mx == kNegInf) return -1;
  double total = 0.0;
  for (double v : lw) {
    if (v != kNegInf) total += std::exp(v - mx);
  }
  double u = uniform_real(rng) * total;
  double acc = 0.0;
  int last = -1;
  for (size_t i = 0; i < lw.size(); ++i) {
    if (lw[i] == kNegInf) continue;
    acc += std::exp(lw[i] - mx);
    last = static_cast<int>(i);
    if (u < acc) return last;
  }
  return last;  // u == total up to roundoff
}

// Floor/ceil halves with mathematical (toward -inf / toward +inf) rounding,
// valid for negative arguments.
inline long floor_half(long a) { return (a >= 0) ? a / 2 : -((-a + 1) / 2); }
inline long ceil_half(long a) { return -floor_half(-a); }

// floor((x + y) / 2) with mathematical rounding.
inline long floor_avg(long x, long y) { return floor_half(x + y); }

}  // namespace taxicab
