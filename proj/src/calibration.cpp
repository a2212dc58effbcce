#include "taxicab/calibration.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

#include "taxicab/numeric.hpp"
#include "taxicab/tent.hpp"

namespace taxicab {

Pmf empirical_pmf_of(const std::vector<long>& y) {
  std::map<long, long> counts;
  for (long v : y) ++counts[v];
  return empirical_pmf(counts);
}

double empirical_quantile(const Pmf& p_hat, double q) {
  double cum = 0.0;
  for (const auto& [state, mass] : p_hat) {
    cum += mass;
    if (cum >= q - 1e-12) return static_cast<double>(state);
  }
  return static_cast<double>(p_hat.rbegin()->first);
}

double estimate_depth(double alpha, double beta, long n_draws, Rng& rng) {
  if (n_draws < 1) throw std::invalid_argument("estimate_depth: need n_draws >= 1");
  TreePrior prior{alpha, beta};
  prior.validate();
  const int max_depth = 50;  // bounds pathological alpha ~ 1, beta ~ 0 draws
  long total_leaves = 0;
  double total_depth = 0.0;
  for (long i = 0; i < n_draws; ++i) {
    // iterative draw: stack of node depths awaiting a split decision
    std::vector<int> stack{0};
    while (!stack.empty()) {
      int d = stack.back();
      stack.pop_back();
      if (d < max_depth && bernoulli(rng, prior.split_prob(d))) {
        stack.push_back(d + 1);
        stack.push_back(d + 1);
      } else {
        ++total_leaves;
        total_depth += d;
      }
    }
  }
  return total_depth / static_cast<double>(total_leaves);
}

namespace {

double bracket_value(long x, double pow2d) {
  return std::exp(std::floor(static_cast<double>(x) / pow2d));
}

}  // namespace

long estimate_kappa(const CalibInputs& in, double t, Rng& rng) {
  if (t < 0.0 || t >= 0.5) throw std::invalid_argument("estimate_kappa: t must lie in [0, 0.5)");
  double spread = empirical_quantile(in.p_hat, 1.0 - t) - in.median;
  if (spread <= 1.0) return bernoulli(rng, 0.5) ? 1 : 0;

  double pow2d = std::pow(2.0, in.d_hat);
  // past this the exponential strictly exceeds the bracket
  long kappa_max = static_cast<long>(
      std::ceil(2.0 * pow2d * (std::ceil(std::log(std::max(spread, 1.0))) + 2.0)));
  std::vector<long> bracket;
  for (long x = 0; x <= kappa_max; ++x) {
    double e = bracket_value(x, pow2d);
    if (e >= spread && e < spread + 1.0) bracket.push_back(x);
  }
  if (!bracket.empty()) {
    return bracket[static_cast<size_t>(uniform_int(rng, 0, static_cast<long>(bracket.size()) - 1))];
  }
  // no solution: take the largest value below the bracket and the smallest
  // at-or-above it, then sample uniformly from the union
  double best_below = -1.0;
  double best_above = -1.0;
  for (long x = 0; x <= kappa_max; ++x) {
    double e = bracket_value(x, pow2d);
    if (e < spread + 1.0) best_below = std::max(best_below, e);
    if (e >= spread + 1.0 && (best_above < 0.0 || e < best_above)) best_above = e;
  }
  std::vector<long> candidates;
  for (long x = 0; x <= kappa_max; ++x) {
    double e = bracket_value(x, pow2d);
    if ((best_below >= 0.0 && e == best_below) || (best_above >= 0.0 && e == best_above))
      candidates.push_back(x);
  }
  if (candidates.empty()) throw std::runtime_error("estimate_kappa: empty candidate set");
  return candidates[static_cast<size_t>(uniform_int(rng, 0, static_cast<long>(candidates.size()) - 1))];
}

Pmf tent_pmf_table(long lambda, long k_eff, double t) {
  TentParams params{lambda, k_eff, t};
  params.validate();
  long reach = k_eff;
  if (t > 0.0) {
    double ps = params.p_star();
    reach += 1 + std::max<long>(0, static_cast<long>(std::ceil(std::log(1e-10 / t) / std::log1p(-ps))));
  }
  Pmf out;
  for (long yv = lambda - reach; yv <= lambda + reach; ++yv) {
    double lp = tent_log_pmf(yv, params);
    if (lp != kNegInf) out[yv] = std::exp(lp);
  }
  return out;
}

double tent_hellinger(const Pmf& p_hat, long lambda, long k_eff, double t) {
  Pmf tent = tent_pmf_table(lambda, k_eff, t);
  double acc = 0.0;
  auto it = p_hat.begin();
  auto jt = tent.begin();
  while (it != p_hat.end() || jt != tent.end()) {
    double a = 0.0, b = 0.0;
    if (jt == tent.end() || (it != p_hat.end() && it->first < jt->first)) {
      a = it->second;
      ++it;
    } else if (it == p_hat.end() || jt->first < it->first) {
      b = jt->second;
      ++jt;
    } else {
      a = it->second;
      b = jt->second;
      ++it;
      ++jt;
    }
    double d = std::sqrt(a) - std::sqrt(b);
    acc += d * d;
  }
  return std::sqrt(0.5 * acc);
}

double estimate_t(const CalibInputs& in, long kappa_hat) {
  if (in.grid_increment <= 0.0) throw std::invalid_argument("estimate_t: grid increment must be > 0");
  double pow2d = std::pow(2.0, in.d_hat);
  long k_hat = static_cast<long>(std::floor(static_cast<double>(kappa_hat) / pow2d));
  long k_eff = effective_scale(k_hat);
  long med = static_cast<long>(std::llround(in.median));
  double best_t = 0.0;
  double best_h = 2.0;
  for (double tv = 0.0; tv <= 0.49 + 1e-12; tv += in.grid_increment) {
    double h = tent_hellinger(in.p_hat, med, k_eff, tv);
    if (h < best_h - 1e-15) {  // ties resolve to the smallest t
      best_h = h;
      best_t = tv;
    }
  }
  return best_t;
}

std::pair<long, double> estimate_kappa_t(const CalibInputs& in, Rng& rng) {
  if (in.p_hat.empty()) throw std::invalid_argument("estimate_kappa_t: empty pmf");
  long med = static_cast<long>(std::llround(in.median));

  // grid-search max-likelihood start for (t, k) over the tent family at the median
  long spread = std::max<long>(
      1, static_cast<long>(in.p_hat.rbegin()->first - in.p_hat.begin()->first));
  long k_scan = static_cast<long>(std::ceil(std::log(static_cast<double>(spread)))) + 2;
  double best_ll = -std::numeric_limits<double>::infinity();
  double t0 = 0.0;
  long k0 = 0;
  for (long kc = 0; kc <= k_scan; ++kc) {
    long k_eff = effective_scale(kc);
    for (double tv = 0.0; tv <= 0.49 + 1e-12; tv += in.grid_increment) {
      TentParams params{med, k_eff, tv};
      double ll = 0.0;
      for (const auto& [state, mass] : in.p_hat) {
        double lp = tent_log_pmf(state, params);
        if (lp == kNegInf) {
          ll = kNegInf;
          break;
        }
        ll += mass * lp;
      }
      if (ll > best_ll) {
        best_ll = ll;
        t0 = tv;
        k0 = kc;
      }
    }
  }
  double pow2d = std::pow(2.0, in.d_hat);
  long kappa = static_cast<long>(std::llround(static_cast<double>(k0) * pow2d));
  double t_cur = t0;

  for (int i = 1; i <= in.max_iters; ++i) {
    double t_next = estimate_t(in, kappa);
    long kappa_next = estimate_kappa(in, t_next, rng);
    bool done = std::fabs(t_next - t_cur) < in.eps_t &&
                std::fabs(static_cast<double>(kappa_next - kappa)) < in.eps_kappa;
    t_cur = t_next;
    kappa = kappa_next;
    if (done) break;
  }
  return {kappa, t_cur};
}

}  // namespace taxicab
