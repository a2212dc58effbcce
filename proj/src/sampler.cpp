#include "taxicab/sampler.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>

#include "taxicab/numeric.hpp"

namespace taxicab {

namespace {

void check_radius(long m) {
  if (m < 1) throw std::invalid_argument("taxicab: neighborhood radius must be >= 1");
}

}  // namespace

long Neighborhood::cardinality() const {
  long z = 1;
  for (size_t b = 0; b < center.size(); ++b) z *= 2 * radius + 1;
  return z;
}

std::vector<std::vector<long>> Neighborhood::elements() const {
  size_t dim = center.size();
  std::vector<std::vector<long>> out;
  out.reserve(static_cast<size_t>(cardinality()));
  std::vector<long> offs(dim, -radius);
  while (true) {
    std::vector<long> pt(dim);
    for (size_t b = 0; b < dim; ++b) pt[b] = center[b] + offs[b];
    out.push_back(std::move(pt));
    size_t b = dim;
    while (b > 0) {
      --b;
      if (offs[b] < radius) {
        ++offs[b];
        std::fill(offs.begin() + static_cast<long>(b) + 1, offs.end(), -radius);
        break;
      }
      if (b == 0) return out;
    }
    if (dim == 0) return out;
  }
}

bool Neighborhood::contains(const std::vector<long>& u) const {
  if (u.size() != center.size()) return false;
  for (size_t b = 0; b < u.size(); ++b) {
    if (std::labs(u[b] - center[b]) > radius) return false;
  }
  return true;
}

std::vector<long> draw_auxiliary(Rng& rng, const std::vector<long>& lambda, long m) {
  check_radius(m);
  std::vector<long> u(lambda.size());
  for (size_t b = 0; b < lambda.size(); ++b) u[b] = uniform_int(rng, lambda[b] - m, lambda[b] + m);
  return u;
}

std::vector<long> tc_slice_draw(Rng& rng, const std::vector<long>& u, long m,
                                const DiscreteTarget& target) {
  check_radius(m);
  Neighborhood ball{u, m};
  auto candidates = ball.elements();
  std::vector<double> lw(candidates.size());
  for (size_t i = 0; i < candidates.size(); ++i) lw[i] = target(candidates[i]);
  int pick = categorical_from_log(rng, lw);
  if (pick < 0) throw std::runtime_error("taxicab: slice has no candidate with positive mass");
  return candidates[static_cast<size_t>(pick)];
}

TcState tc_step(Rng& rng, const TcState& state, long m, const DiscreteTarget& target) {
  TcState next;
  next.u = draw_auxiliary(rng, state.lambda, m);
  next.lambda = tc_slice_draw(rng, next.u, m, target);
  return next;
}

std::vector<long> tc_blocked_step(Rng& rng, const std::vector<long>& lambda,
                                  const std::vector<std::vector<int>>& blocks,
                                  const std::vector<long>& block_radius,
                                  const DiscreteTarget& target) {
  if (blocks.size() != block_radius.size())
    throw std::invalid_argument("taxicab: one radius per block required");
  std::vector<int> seen(lambda.size(), 0);
  for (const auto& blk : blocks) {
    for (int b : blk) {
      if (b < 0 || static_cast<size_t>(b) >= lambda.size() || seen[static_cast<size_t>(b)]++)
        throw std::invalid_argument("taxicab: blocks must partition the coordinates");
    }
  }
  for (int s : seen) {
    if (!s) throw std::invalid_argument("taxicab: blocks must partition the coordinates");
  }

  std::vector<long> cur = lambda;
  for (size_t p = 0; p < blocks.size(); ++p) {
    const auto& blk = blocks[p];
    std::vector<long> sub(blk.size());
    for (size_t j = 0; j < blk.size(); ++j) sub[j] = cur[static_cast<size_t>(blk[j])];
    DiscreteTarget cond = [&](const std::vector<long>& v) {
      std::vector<long> full = cur;
      for (size_t j = 0; j < blk.size(); ++j) full[static_cast<size_t>(blk[j])] = v[j];
      return target(full);
    };
    auto u = draw_auxiliary(rng, sub, block_radius[p]);
    auto drawn = tc_slice_draw(rng, u, block_radius[p], cond);
    for (size_t j = 0; j < blk.size(); ++j) cur[static_cast<size_t>(blk[j])] = drawn[j];
  }
  return cur;
}

std::vector<long> mh_rw_step(Rng& rng, const std::vector<long>& lambda, long radius,
                             const DiscreteTarget& target) {
  check_radius(radius);
  size_t dim = lambda.size();
  long width = 2 * radius + 1;
  long total = 1;
  for (size_t b = 0; b < dim; ++b) total *= width;
  // rank of the all-zero offset in lexicographic order
  long center_rank = 0;
  long stride = 1;
  for (size_t b = 0; b < dim; ++b) {
    center_rank += radius * stride;
    stride *= width;
  }
  long r = uniform_int(rng, 0, total - 2);
  if (r >= center_rank) ++r;
  std::vector<long> prop(dim);
  for (size_t b = dim; b > 0; --b) {
    prop[b - 1] = lambda[b - 1] + (r % width - radius);
    r /= width;
  }
  double delta = target(prop) - target(lambda);
  if (std::log(uniform_real(rng)) < delta) return prop;
  return lambda;
}

long draw_auxiliary_1d(Rng& rng, long lambda, long m) {
  check_radius(m);
  return uniform_int(rng, lambda - m, lambda + m);
}

long tc_slice_draw_1d(Rng& rng, long u, long m, const DiscreteTarget1d& target) {
  check_radius(m);
  std::vector<double> lw(static_cast<size_t>(2 * m + 1));
  for (long j = -m; j <= m; ++j) lw[static_cast<size_t>(j + m)] = target(u + j);
  int pick = categorical_from_log(rng, lw);
  if (pick < 0) throw std::runtime_error("taxicab: slice has no candidate with positive mass");
  return u + pick - m;
}

long tc_step_1d(Rng& rng, long lambda, long m, const DiscreteTarget1d& target) {
  long u = draw_auxiliary_1d(rng, lambda, m);
  return tc_slice_draw_1d(rng, u, m, target);
}

long mh_rw_step_1d(Rng& rng, long lambda, long radius, const DiscreteTarget1d& target) {
  check_radius(radius);
  long off = uniform_int(rng, 1, 2 * radius);
  long prop = lambda + (off <= radius ? -off : off - radius);
  double delta = target(prop) - target(lambda);
  if (std::log(uniform_real(rng)) < delta) return prop;
  return lambda;
}

std::vector<std::vector<double>> marginal_kernel_matrix(const std::vector<long>& support,
                                                        const DiscreteTarget1d& log_target,
                                                        long m) {
  check_radius(m);
  if (support.empty()) throw std::invalid_argument("taxicab: empty support");
  size_t n = support.size();
  std::map<long, size_t> index;
  for (size_t i = 0; i < n; ++i) index[support[i]] = i;
  if (index.size() != n) throw std::invalid_argument("taxicab: duplicate support states");

  std::vector<double> lp(n);
  for (size_t i = 0; i < n; ++i) lp[i] = log_target(support[i]);
  double lse = log_sum_exp(lp);
  std::vector<double> p(n);
  for (size_t i = 0; i < n; ++i) p[i] = std::exp(lp[i] - lse);

  double aux = 1.0 / static_cast<double>(2 * m + 1);
  std::vector<std::vector<double>> q(n, std::vector<double>(n, 0.0));
  for (size_t i = 0; i < n; ++i) {
    long s = support[i];
    // auxiliaries range over all integers; only balls intersecting the support
    // contribute, and every u in the ball around a support state qualifies
    for (long u = s - m; u <= s + m; ++u) {
      double z = 0.0;
      for (long c = u - m; c <= u + m; ++c) {
        auto it = index.find(c);
        if (it != index.end()) z += p[it->second];
      }
      if (z <= 0.0) throw std::runtime_error("taxicab: slice with zero mass in kernel oracle");
      for (long c = u - m; c <= u + m; ++c) {
        auto it = index.find(c);
        if (it != index.end()) q[i][it->second] += aux * p[it->second] / z;
      }
    }
  }
  return q;
}

}  // namespace taxicab
