#include "taxicab/multimodal.hpp"

#include <cmath>
#include <stdexcept>

#include "taxicab/numeric.hpp"

namespace taxicab {

void MultimodalTarget::validate() const {
  if (w <= 0.0 || w >= 1.0) throw std::invalid_argument("multimodal target: w must lie in (0, 1)");
  if (rate <= 0.0) throw std::invalid_argument("multimodal target: rate must be > 0");
}

double poisson_log_pmf(long y, double rate) {
  if (y < 0) return kNegInf;
  // log-gamma form keeps this usable out to locations of several hundred
  return static_cast<double>(y) * std::log(rate) - rate - std::lgamma(static_cast<double>(y) + 1.0);
}

double multimodal_log_unnorm(long lambda, const MultimodalTarget& tgt) {
  tgt.validate();
  if (lambda < 0) return kNegInf;
  double parity_w = (lambda % 2 == 0) ? tgt.w : 1.0 - tgt.w;
  return std::log(parity_w) + poisson_log_pmf(lambda, tgt.rate);
}

}  // namespace taxicab
