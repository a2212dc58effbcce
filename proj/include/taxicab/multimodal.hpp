#pragma once

namespace taxicab {

// Parity-weighted Poisson benchmark target on the non-negative integers:
// mass proportional to w * Pois(lambda; rate) on even states and
// (1-w) * Pois(lambda; rate) on odd states.
struct MultimodalTarget {
  double w = 0.0005;
  double rate = 10.0;

  void validate() const;
};

double poisson_log_pmf(long y, double rate);

// Log unnormalized mass; -inf for lambda < 0.
double multimodal_log_unnorm(long lambda, const MultimodalTarget& tgt);

}  // namespace taxicab
