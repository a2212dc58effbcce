#include "taxicab/priors.hpp"

#include <cmath>
#include <stdexcept>

#include "taxicab/numeric.hpp"

namespace taxicab {

void LocationPrior::validate() const {
  if (d1 < 0 || d2 < d1) throw std::invalid_argument("location prior: need 0 <= d1 <= d2");
}

double LocationPrior::log_pmf(long lambda) const {
  if (lambda < d1 || lambda > d2) return kNegInf;
  return -std::log(static_cast<double>(d2 - d1 + 1));
}

void ScalePrior::validate() const {
  if (kappa < 0) throw std::invalid_argument("scale prior: kappa must be >= 0");
  if (beta_k < 0.0) throw std::invalid_argument("scale prior: beta_k must be >= 0");
  if (t_k < 0.0 || t_k >= 0.5) throw std::invalid_argument("scale prior: t_k must lie in [0, 0.5)");
}

TentParams ScalePrior::at(long lambda, int depth) const {
  validate();
  if (depth < 0) throw std::invalid_argument("scale prior: negative depth");
  long loc = (depth >= 63) ? 0 : (kappa >> depth);
  double denom = std::pow(1.0 + static_cast<double>(depth), beta_k);
  long width = static_cast<long>(std::floor(nonneg_log(lambda) / denom));
  return TentParams{loc, width, t_k};
}

double ScalePrior::log_pmf(long k, long lambda, int depth) const {
  return tent_log_pmf(k, at(lambda, depth));
}

}  // namespace taxicab
