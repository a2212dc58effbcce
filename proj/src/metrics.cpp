#include "taxicab/metrics.hpp"

#include <cmath>
#include <stdexcept>
#include <string>

#include "taxicab/numeric.hpp"

namespace taxicab {

namespace {

void check_normalized(const Pmf& p, const char* who) {
  double s = 0.0;
  for (const auto& [state, mass] : p) {
    (void)state;
    if (mass < 0.0) throw std::invalid_argument(std::string(who) + ": negative mass");
    s += mass;
  }
  if (std::fabs(s - 1.0) > 1e-9) throw std::invalid_argument(std::string(who) + ": pmf not normalized");
}

double accumulate_distance(const Pmf& p, const Pmf& q, DistanceKind kind) {
  double acc = 0.0;
  auto it = p.begin();
  auto jt = q.begin();
  auto take = [&](double a, double b) {
    if (kind == DistanceKind::tv) {
      acc += std::fabs(a - b);
    } else {
      double d = std::sqrt(a) - std::sqrt(b);
      acc += d * d;
    }
  };
  while (it != p.end() || jt != q.end()) {
    if (jt == q.end() || (it != p.end() && it->first < jt->first)) {
      take(it->second, 0.0);
      ++it;
    } else if (it == p.end() || jt->first < it->first) {
      take(0.0, jt->second);
      ++jt;
    } else {
      take(it->second, jt->second);
      ++it;
      ++jt;
    }
  }
  return (kind == DistanceKind::tv) ? 0.5 * acc : std::sqrt(0.5 * acc);
}

}  // namespace

Pmf empirical_pmf(const std::map<long, long>& visit_counts) {
  long total = 0;
  for (const auto& [state, c] : visit_counts) {
    (void)state;
    if (c < 0) throw std::invalid_argument("empirical_pmf: negative count");
    total += c;
  }
  if (total == 0) throw std::invalid_argument("empirical_pmf: no visits");
  Pmf out;
  for (const auto& [state, c] : visit_counts) {
    if (c > 0) out[state] = static_cast<double>(c) / static_cast<double>(total);
  }
  return out;
}

Pmf truncated_pmf(const std::function<double(long)>& log_unnorm, long start) {
  // first pass: stabilize the normalizer
  double lse = kNegInf;
  long state = start;
  int idle = 0;
  const long hard_cap = start + 200000;
  std::vector<double> lw;
  while (state < hard_cap) {
    double v = log_unnorm(state);
    lw.push_back(v);
    if (v != kNegInf) {
      double mx = std::max(lse, v);
      lse = mx + std::log(std::exp(lse - mx) + std::exp(v - mx));
      idle = (v - lse < std::log(1e-18)) ? idle + 1 : 0;
    } else {
      ++idle;
    }
    ++state;
    if (idle > 60) break;
  }
  if (lse == kNegInf) throw std::invalid_argument("truncated_pmf: target has no mass");

  Pmf out;
  double cum = 0.0;
  for (size_t i = 0; i < lw.size(); ++i) {
    if (cum >= 1.0 - 1e-12) break;
    double mass = std::exp(lw[i] - lse);
    if (mass > 1e-15) {
      out[start + static_cast<long>(i)] = mass;
      cum += mass;
    }
  }
  if (cum < 1.0) out[kOverflowState] = 1.0 - cum;
  return out;
}

double tv_distance(const Pmf& p, const Pmf& q) {
  check_normalized(p, "tv_distance");
  check_normalized(q, "tv_distance");
  return accumulate_distance(p, q, DistanceKind::tv);
}

double hellinger_distance(const Pmf& p, const Pmf& q) {
  check_normalized(p, "hellinger_distance");
  check_normalized(q, "hellinger_distance");
  return accumulate_distance(p, q, DistanceKind::hellinger);
}

double conditional_distance(const Pmf& p, const Pmf& q, Parity parity, DistanceKind kind) {
  check_normalized(p, "conditional_distance");
  check_normalized(q, "conditional_distance");
  auto condition = [&](const Pmf& src) {
    Pmf out;
    double s = 0.0;
    long want = (parity == Parity::even) ? 0 : 1;
    for (const auto& [state, mass] : src) {
      if (state == kOverflowState) continue;
      long r = ((state % 2) + 2) % 2;
      if (r == want) {
        out[state] = mass;
        s += mass;
      }
    }
    if (s <= 0.0) throw std::runtime_error("conditional_distance: zero mass on the parity class");
    for (auto& [state, mass] : out) {
      (void)state;
      mass /= s;
    }
    return out;
  };
  return accumulate_distance(condition(p), condition(q), kind);
}

double mae(const std::vector<std::vector<double>>& g_draws, const std::vector<long>& y) {
  if (g_draws.empty()) throw std::invalid_argument("mae: no posterior draws");
  double acc = 0.0;
  for (const auto& draw : g_draws) {
    if (draw.size() != y.size()) throw std::invalid_argument("mae: draw/observation size mismatch");
    for (size_t i = 0; i < y.size(); ++i) acc += std::fabs(draw[i] - static_cast<double>(y[i]));
  }
  return acc / (static_cast<double>(g_draws.size()) * static_cast<double>(y.size()));
}

double l2_norm(const std::vector<std::vector<double>>& g_draws, const std::vector<long>& g_true,
               bool posterior_mean) {
  if (g_draws.empty()) throw std::invalid_argument("l2_norm: no posterior draws");
  for (const auto& draw : g_draws) {
    if (draw.size() != g_true.size()) throw std::invalid_argument("l2_norm: draw/truth size mismatch");
  }
  if (posterior_mean) {
    double acc = 0.0;
    for (size_t i = 0; i < g_true.size(); ++i) {
      double m = 0.0;
      for (const auto& draw : g_draws) m += draw[i];
      m /= static_cast<double>(g_draws.size());
      double r = m - static_cast<double>(g_true[i]);
      acc += r * r;
    }
    return std::sqrt(acc);
  }
  double acc = 0.0;
  for (const auto& draw : g_draws) {
    double ss = 0.0;
    for (size_t i = 0; i < g_true.size(); ++i) {
      double r = draw[i] - static_cast<double>(g_true[i]);
      ss += r * r;
    }
    acc += std::sqrt(ss);
  }
  return acc / static_cast<double>(g_draws.size());
}

}  // namespace taxicab
