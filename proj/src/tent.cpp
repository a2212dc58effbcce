#include "taxicab/tent.hpp"

#include <cmath>
#include <stdexcept>

#include "taxicab/numeric.hpp"

namespace taxicab {

void TentParams::validate() const {
  if (t < 0.0 || t >= 0.5) throw std::invalid_argument("tent: t must lie in [0, 0.5)");
  if (k_eff < 0) throw std::invalid_argument("tent: k_eff must be >= 0");
}

double TentParams::p_star() const {
  double w = static_cast<double>(k_eff) + 1.0;
  return std::min(0.99, (1.0 - 2.0 * t) / (t * w * w));
}

double tent_log_pmf(long y, const TentParams& p) {
  p.validate();
  long d = std::labs(y - p.lambda);
  double w = static_cast<double>(p.k_eff) + 1.0;
  if (d <= p.k_eff) {
    return std::log1p(-2.0 * p.t) + std::log(w - static_cast<double>(d)) - 2.0 * std::log(w);
  }
  if (p.t == 0.0) return kNegInf;  // zero tail mass
  double ps = p.p_star();
  return std::log(p.t) + std::log(ps) +
         static_cast<double>(d - p.k_eff - 1) * std::log1p(-ps);
}

long tent_sample(Rng& rng, const TentParams& p) {
  p.validate();
  double u = uniform_real(rng);
  if (u < 1.0 - 2.0 * p.t) {
    // Sum of two uniforms on {0..k} is triangular on {0..2k} with mode k.
    long a = uniform_int(rng, 0, p.k_eff);
    long b = uniform_int(rng, 0, p.k_eff);
    return p.lambda + a + b - p.k_eff;
  }
  long side = (u < 1.0 - p.t) ? -1 : 1;
  long d = p.k_eff + 1 + geometric_draw(rng, p.p_star());
  return p.lambda + side * d;
}

long effective_scale(long k) {
  if (k < 0) return 0;
  if (k > 43) throw std::overflow_error("effective_scale: floor(e^k) exceeds the 64-bit range");
  return static_cast<long>(std::floor(std::exp(static_cast<long double>(k))));
}

double nonneg_log(long lambda) {
  if (lambda < 0) throw std::invalid_argument("nonneg_log: negative argument");
  if (lambda <= 1) return 0.0;
  return std::log(static_cast<double>(lambda));
}

}  // namespace taxicab
