#include "taxicab/tree_model.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>
#include <stdexcept>

#include "taxicab/numeric.hpp"
#include "taxicab/tent.hpp"

namespace taxicab {

void ModelParams::validate() const {
  if (t < 0.0 || t >= 0.5) throw std::invalid_argument("model: t must lie in [0, 0.5)");
  loc.validate();
  scale.validate();
  tree_prior.validate();
  if (zi && (h1 <= 0.0 || h2 <= 0.0))
    throw std::invalid_argument("model: zero-inflated mode needs h1, h2 > 0");
}

void MoveCounters::add(const MoveCounters& o) {
  birth_proposed += o.birth_proposed;
  birth_accepted += o.birth_accepted;
  death_proposed += o.death_proposed;
  death_accepted += o.death_accepted;
  perturb_proposed += o.perturb_proposed;
  perturb_accepted += o.perturb_accepted;
}

double leaf_log_lik(const LeafStats& stats, long lambda, long k, double t) {
  if (k > 43) return kNegInf;  // past the representable effective scale
  TentParams tent{lambda, effective_scale(k), t};
  double acc = 0.0;
  for (const auto& [value, count] : stats.hist) {
    double lp = tent_log_pmf(value, tent);
    if (lp == kNegInf) return kNegInf;
    acc += static_cast<double>(count) * lp;
  }
  return acc;
}

std::pair<long, long> match_split(long theta, long a) {
  return {theta - floor_half(a), theta + ceil_half(a)};
}

std::pair<long, long> match_merge(long x, long y) { return {floor_avg(x, y), y - x}; }

double zi_rho_marginal_log(long n, long n1, double h1, double h2) {
  double dn = static_cast<double>(n);
  double dn1 = static_cast<double>(n1);
  return std::lgamma(h1 + h2) - std::lgamma(h1) - std::lgamma(h2) + std::lgamma(h1 + dn1) +
         std::lgamma(h2 + dn - dn1) - std::lgamma(h1 + h2 + dn);
}

double zi_rho_marginal_leaf_lik(const LeafStats& stats, long lambda, long k, double h1, double h2,
                                double t) {
  return zi_rho_marginal_log(stats.n, stats.n1, h1, h2) + leaf_log_lik(stats, lambda, k, t);
}

LeafContext LeafContext::make(const LeafStats& stats, const ModelParams& mp, int depth) {
  LeafContext ctx;
  ctx.stats = &stats;
  ctx.loc = &mp.loc;
  ctx.scale = &mp.scale;
  ctx.t = mp.t;
  ctx.depth = depth;
  ctx.scale_denom = std::pow(1.0 + static_cast<double>(depth), mp.scale.beta_k);
  ctx.scale_loc = (depth >= 63) ? 0 : (mp.scale.kappa >> depth);
  return ctx;
}

TentParams LeafContext::prior_tent(long lambda) const {
  long width = static_cast<long>(std::floor(nonneg_log(lambda) / scale_denom));
  return TentParams{scale_loc, width, scale->t_k};
}

double joint_weight(const LeafContext& ctx, long lambda, long k) {
  double lp = ctx.loc->log_pmf(lambda);
  if (lp == kNegInf) return kNegInf;
  lp += tent_log_pmf(k, ctx.prior_tent(lambda));
  if (lp == kNegInf) return kNegInf;
  return lp + leaf_log_lik(*ctx.stats, lambda, k, ctx.t);
}

namespace {

// Weights over the product slice, row-major in lambda then k.
void fill_slice_weights(const LeafContext& ctx, long u, long r, long m_lambda, long m_k,
                        std::vector<double>& w) {
  size_t nl = static_cast<size_t>(2 * m_lambda + 1);
  size_t nk = static_cast<size_t>(2 * m_k + 1);
  w.assign(nl * nk, kNegInf);
  for (size_t i = 0; i < nl; ++i) {
    long lambda = u - m_lambda + static_cast<long>(i);
    if (ctx.loc->log_pmf(lambda) == kNegInf) continue;  // skip: keeps nonneg_log in-domain
    for (size_t j = 0; j < nk; ++j) {
      long k = r - m_k + static_cast<long>(j);
      w[i * nk + j] = joint_weight(ctx, lambda, k);
    }
  }
}

}  // namespace

double joint_slice_sum(const LeafContext& ctx, long u, long r, long m_lambda, long m_k) {
  std::vector<double> w;
  fill_slice_weights(ctx, u, r, m_lambda, m_k, w);
  return log_sum_exp(w);
}

JointDraw joint_slice_draw(Rng& rng, const LeafContext& ctx, long u, long r, long m_lambda,
                           long m_k) {
  std::vector<double> w;
  fill_slice_weights(ctx, u, r, m_lambda, m_k, w);
  int pick = categorical_from_log(rng, w);
  if (pick < 0) throw std::runtime_error("tree model: slice has no candidate with positive mass");
  long nk = 2 * m_k + 1;
  JointDraw out;
  out.lambda = u - m_lambda + pick / nk;
  out.k = r - m_k + pick % nk;
  out.log_sum = log_sum_exp(w);
  return out;
}

namespace {

void fill_marginal_weights(const LeafContext& ctx, long k_window, std::vector<double>& w,
                           long& k_lo) {
  long d1 = ctx.loc->d1;
  long d2 = ctx.loc->d2;
  k_lo = ctx.scale_loc - k_window;
  size_t nl = static_cast<size_t>(d2 - d1 + 1);
  size_t nk = static_cast<size_t>(2 * k_window + 1);
  w.assign(nl * nk, kNegInf);
  for (size_t i = 0; i < nl; ++i) {
    long lambda = d1 + static_cast<long>(i);
    for (size_t j = 0; j < nk; ++j) {
      w[i * nk + j] = joint_weight(ctx, lambda, k_lo + static_cast<long>(j));
    }
  }
}

}  // namespace

double marginal_log_lik(const LeafContext& ctx, long k_window) {
  if (k_window < 0) throw std::invalid_argument("tree model: empty marginalization window");
  std::vector<double> w;
  long k_lo = 0;
  fill_marginal_weights(ctx, k_window, w, k_lo);
  return log_sum_exp(w);
}

JointDraw marginal_draw(Rng& rng, const LeafContext& ctx, long k_window) {
  std::vector<double> w;
  long k_lo = 0;
  fill_marginal_weights(ctx, k_window, w, k_lo);
  int pick = categorical_from_log(rng, w);
  if (pick < 0) throw std::runtime_error("tree model: empty marginal conditional");
  long nk = 2 * k_window + 1;
  JointDraw out;
  out.lambda = ctx.loc->d1 + pick / nk;
  out.k = k_lo + pick % nk;
  out.log_sum = log_sum_exp(w);
  return out;
}

long marginal_candidate_count(const LeafContext& ctx, long k_window) {
  return (ctx.loc->d2 - ctx.loc->d1 + 1) * (2 * k_window + 1);
}

TreeSampler::TreeSampler(const Dataset& data, const CutpointGrid& grid, const ModelParams& params,
                         SamplerKind kind, MoveRadii radii, MoveProbs probs)
    : data_(&data), grid_(&grid), mp_(params), kind_(kind), radii_(radii), probs_(probs) {
  mp_.validate();
  if (data.n() == 0) throw std::invalid_argument("tree model: empty dataset");
  if (radii_.m_lambda < 1 || radii_.m_k < 1 || radii_.lambda < 1 || radii_.k < 1 || radii_.c < 1)
    throw std::invalid_argument("tree model: radii must be >= 1");
  double psum = probs_.birth + probs_.death + probs_.perturb;
  if (probs_.birth <= 0.0 || probs_.death <= 0.0 || probs_.perturb < 0.0 ||
      std::fabs(psum - 1.0) > 1e-12)
    throw std::invalid_argument("tree model: move probabilities must be positive and sum to 1");

  y_min_ = *std::min_element(data.y.begin(), data.y.end());
  y_max_ = *std::max_element(data.y.begin(), data.y.end());
  count_scratch_.assign(static_cast<size_t>(y_max_ - y_min_ + 1), 0);

  leaf_obs_.assign(1, {});
  leaf_obs_[0].resize(static_cast<size_t>(data.n()));
  for (int i = 0; i < data.n(); ++i) leaf_obs_[0][static_cast<size_t>(i)] = i;
  z_.assign(static_cast<size_t>(data.n()), 0);

  // start every chain at a single-node tree with prior-guided values
  std::vector<long> ys = data.y;
  std::nth_element(ys.begin(), ys.begin() + ys.size() / 2, ys.end());
  long med = ys[ys.size() / 2];
  TreeNode& rootn = tree_.node(tree_.root());
  rootn.lambda = std::clamp(med, mp_.loc.d1, mp_.loc.d2);
  rootn.k = mp_.scale.kappa;
  rootn.rho = mp_.h1 / (mp_.h1 + mp_.h2);

  // marginalization windows for the naive-MH baseline: wide enough that the
  // scale prior mass left outside is below 1e-6 at the widest prior tent
  mh_window_.resize(64);
  for (int d = 0; d < 64; ++d) {
    TentParams widest = mp_.scale.at(mp_.loc.d2, std::min(d, 62));
    long w = widest.k_eff;
    if (mp_.scale.t_k > 0.0) {
      double ps = widest.p_star();
      double need = std::log(1e-6 / (2.0 * mp_.scale.t_k)) / std::log1p(-ps);
      w += 1 + std::max<long>(0, static_cast<long>(std::ceil(need)));
    }
    mh_window_[static_cast<size_t>(d)] = w;
  }
}

LeafStats TreeSampler::stats_of(const std::vector<int>& obs) const {
  LeafStats stats;
  stats.n = static_cast<long>(obs.size());
  long lo = y_max_, hi = y_min_;
  for (int i : obs) {
    if (mp_.zi && z_[static_cast<size_t>(i)]) {
      ++stats.n1;
      continue;
    }
    long yv = data_->y[static_cast<size_t>(i)];
    ++count_scratch_[static_cast<size_t>(yv - y_min_)];
    lo = std::min(lo, yv);
    hi = std::max(hi, yv);
  }
  for (long v = lo; v <= hi; ++v) {
    int c = count_scratch_[static_cast<size_t>(v - y_min_)];
    if (c > 0) {
      stats.hist.emplace_back(v, c);
      count_scratch_[static_cast<size_t>(v - y_min_)] = 0;
    }
  }
  return stats;
}

LeafContext TreeSampler::context_for(const LeafStats& stats, int depth) const {
  return LeafContext::make(stats, mp_, depth);
}

double TreeSampler::move_leaf_ll(const LeafStats& stats, long lambda, long k) const {
  double ll = leaf_log_lik(stats, lambda, k, mp_.t);
  if (mp_.zi) ll += zi_rho_marginal_log(stats.n, stats.n1, mp_.h1, mp_.h2);
  return ll;
}

double TreeSampler::tree_prior_delta(int depth) const {
  const TreePrior& tp = mp_.tree_prior;
  // uniform rule prior cancels against the uniform rule proposal
  return tp.log_split(depth) + 2.0 * tp.log_stay(depth + 1) - tp.log_stay(depth);
}

double TreeSampler::birth_prob(bool root_only) const {
  // at a single-node tree the birth move absorbs death's share
  return root_only ? probs_.birth + probs_.death : probs_.birth;
}

long TreeSampler::mh_window(int depth) const {
  return mh_window_[static_cast<size_t>(std::min(depth, 63))];
}

bool TreeSampler::birth_move(Rng& rng) {
  ++counters_.birth_proposed;
  bool ok = (kind_ == SamplerKind::tc) ? birth_move_tc(rng) : birth_move_mh(rng);
  if (ok) ++counters_.birth_accepted;
  return ok;
}

bool TreeSampler::death_move(Rng& rng) {
  ++counters_.death_proposed;
  bool ok = (kind_ == SamplerKind::tc) ? death_move_tc(rng) : death_move_mh(rng);
  if (ok) ++counters_.death_accepted;
  return ok;
}

namespace {

struct ProposedSplit {
  int leaf = -1;
  SplitRule rule;
  std::vector<int> left, right;
  bool valid = false;
};

}  // namespace

// shared proposal front half: leaf uniform over leaves, rule uniform over the
// grid; splits creating an empty child are rejected outright
static ProposedSplit propose_split(Rng& rng, const Tree& tree, const CutpointGrid& grid,
                                   const Dataset& data,
                                   const std::vector<std::vector<int>>& leaf_obs) {
  ProposedSplit out;
  auto leaves = tree.leaves();
  out.leaf = leaves[static_cast<size_t>(uniform_int(rng, 0, static_cast<long>(leaves.size()) - 1))];
  out.rule.var = static_cast<int>(uniform_int(rng, 0, grid.vars() - 1));
  out.rule.cut = static_cast<int>(uniform_int(rng, 0, grid.size(out.rule.var) - 1));
  double cut_value = grid.value(out.rule.var, out.rule.cut);
  for (int i : leaf_obs[static_cast<size_t>(out.leaf)]) {
    if (data.x[static_cast<size_t>(i)][static_cast<size_t>(out.rule.var)] < cut_value) {
      out.left.push_back(i);
    } else {
      out.right.push_back(i);
    }
  }
  out.valid = !out.left.empty() && !out.right.empty();
  return out;
}

bool TreeSampler::birth_move_tc(Rng& rng) {
  bool root_only = tree_.internal_count() == 0;
  int n_prun_before = static_cast<int>(tree_.prunable().size());
  int n_leaves = tree_.leaf_count();

  ProposedSplit prop = propose_split(rng, tree_, *grid_, *data_, leaf_obs_);
  if (!prop.valid) return false;
  int d = tree_.depth(prop.leaf);
  const TreeNode& parent = tree_.node(prop.leaf);

  long a_lambda = uniform_int(rng, -2 * radii_.m_lambda, 2 * radii_.m_lambda);
  long a_k = uniform_int(rng, -2 * radii_.m_k, 2 * radii_.m_k);
  auto [u_l, u_r] = match_split(parent.lambda, a_lambda);
  auto [r_l, r_r] = match_split(parent.k, a_k);

  LeafStats stats_l = stats_of(prop.left);
  LeafStats stats_r = stats_of(prop.right);
  LeafContext ctx_l = context_for(stats_l, d + 1);
  LeafContext ctx_r = context_for(stats_r, d + 1);
  JointDraw left = joint_slice_draw(rng, ctx_l, u_l, r_l, radii_.m_lambda, radii_.m_k);
  JointDraw right = joint_slice_draw(rng, ctx_r, u_r, r_r, radii_.m_lambda, radii_.m_k);

  // collapsed-side slice at the merge-reconstructed centers
  long u_b = floor_avg(left.lambda, right.lambda);
  long r_b = floor_avg(left.k, right.k);
  LeafStats stats_b = stats_of(leaf_obs_[static_cast<size_t>(prop.leaf)]);
  LeafContext ctx_b = context_for(stats_b, d);
  double s_b = joint_slice_sum(ctx_b, u_b, r_b, radii_.m_lambda, radii_.m_k);

  double log_a = tree_prior_delta(d) + left.log_sum + right.log_sum - s_b;
  if (mp_.zi) {
    log_a += zi_rho_marginal_log(stats_l.n, stats_l.n1, mp_.h1, mp_.h2) +
             zi_rho_marginal_log(stats_r.n, stats_r.n1, mp_.h1, mp_.h2) -
             zi_rho_marginal_log(stats_b.n, stats_b.n1, mp_.h1, mp_.h2);
  }
  // reverse death proposal over the post-birth tree; the matching-scalar and
  // auxiliary ball densities cancel between the two path densities
  int sibling = -1;
  if (parent.parent >= 0) {
    const TreeNode& gp = tree_.node(parent.parent);
    sibling = (gp.left == prop.leaf) ? gp.right : gp.left;
  }
  int n_prun_after = n_prun_before + 1 - ((sibling >= 0 && tree_.node(sibling).is_leaf()) ? 1 : 0);
  log_a += std::log(probs_.death) - std::log(static_cast<double>(n_prun_after));
  log_a -= std::log(birth_prob(root_only)) - std::log(static_cast<double>(n_leaves));

  if (!(std::log(uniform_real(rng)) < log_a)) return false;

  double parent_rho = parent.rho;
  auto [lid, rid] = tree_.birth(prop.leaf, prop.rule);
  if (static_cast<size_t>(tree_.capacity()) > leaf_obs_.size())
    leaf_obs_.resize(static_cast<size_t>(tree_.capacity()));
  leaf_obs_[static_cast<size_t>(lid)] = std::move(prop.left);
  leaf_obs_[static_cast<size_t>(rid)] = std::move(prop.right);
  leaf_obs_[static_cast<size_t>(prop.leaf)].clear();
  TreeNode& ln = tree_.node(lid);
  TreeNode& rn = tree_.node(rid);
  ln.lambda = left.lambda;
  ln.k = left.k;
  ln.rho = parent_rho;
  rn.lambda = right.lambda;
  rn.k = right.k;
  rn.rho = parent_rho;
  return true;
}

bool TreeSampler::death_move_tc(Rng& rng) {
  auto prunable = tree_.prunable();
  if (prunable.empty()) return false;
  int nid = prunable[static_cast<size_t>(uniform_int(rng, 0, static_cast<long>(prunable.size()) - 1))];
  const TreeNode& node = tree_.node(nid);
  const TreeNode& lnode = tree_.node(node.left);
  const TreeNode& rnode = tree_.node(node.right);

  int d = tree_.depth(nid);
  long u_b = floor_avg(lnode.lambda, rnode.lambda);
  long r_b = floor_avg(lnode.k, rnode.k);

  std::vector<int> merged = leaf_obs_[static_cast<size_t>(node.left)];
  merged.insert(merged.end(), leaf_obs_[static_cast<size_t>(node.right)].begin(),
                leaf_obs_[static_cast<size_t>(node.right)].end());
  LeafStats stats_b = stats_of(merged);
  LeafContext ctx_b = context_for(stats_b, d);
  JointDraw collapsed = joint_slice_draw(rng, ctx_b, u_b, r_b, radii_.m_lambda, radii_.m_k);

  // fresh matching scalars for the reverse birth direction; its slices must
  // be able to produce the children being pruned, else the reverse density is
  // zero and the move dies here
  long a_lambda = uniform_int(rng, -2 * radii_.m_lambda, 2 * radii_.m_lambda);
  long a_k = uniform_int(rng, -2 * radii_.m_k, 2 * radii_.m_k);
  auto [u_l, u_r] = match_split(collapsed.lambda, a_lambda);
  auto [r_l, r_r] = match_split(collapsed.k, a_k);
  if (std::labs(lnode.lambda - u_l) > radii_.m_lambda ||
      std::labs(rnode.lambda - u_r) > radii_.m_lambda || std::labs(lnode.k - r_l) > radii_.m_k ||
      std::labs(rnode.k - r_r) > radii_.m_k)
    return false;

  LeafStats stats_l = stats_of(leaf_obs_[static_cast<size_t>(node.left)]);
  LeafStats stats_r = stats_of(leaf_obs_[static_cast<size_t>(node.right)]);
  LeafContext ctx_l = context_for(stats_l, d + 1);
  LeafContext ctx_r = context_for(stats_r, d + 1);
  double s_l = joint_slice_sum(ctx_l, u_l, r_l, radii_.m_lambda, radii_.m_k);
  double s_r = joint_slice_sum(ctx_r, u_r, r_r, radii_.m_lambda, radii_.m_k);

  // the birth ratio from the post-death tree back to the current tree
  bool small_root_only = tree_.internal_count() == 1;
  int n_leaves_small = tree_.leaf_count() - 1;
  double log_a = tree_prior_delta(d) + s_l + s_r - collapsed.log_sum;
  if (mp_.zi) {
    log_a += zi_rho_marginal_log(stats_l.n, stats_l.n1, mp_.h1, mp_.h2) +
             zi_rho_marginal_log(stats_r.n, stats_r.n1, mp_.h1, mp_.h2) -
             zi_rho_marginal_log(stats_b.n, stats_b.n1, mp_.h1, mp_.h2);
  }
  log_a += std::log(probs_.death) - std::log(static_cast<double>(prunable.size()));
  log_a -= std::log(birth_prob(small_root_only)) - std::log(static_cast<double>(n_leaves_small));

  if (!(std::log(uniform_real(rng)) < -log_a)) return false;

  double child_rho = lnode.rho;
  leaf_obs_[static_cast<size_t>(node.left)].clear();
  leaf_obs_[static_cast<size_t>(node.right)].clear();
  tree_.death(nid);
  TreeNode& collapsed_node = tree_.node(nid);
  collapsed_node.lambda = collapsed.lambda;
  collapsed_node.k = collapsed.k;
  collapsed_node.rho = child_rho;
  leaf_obs_[static_cast<size_t>(nid)] = std::move(merged);
  return true;
}

bool TreeSampler::birth_move_mh(Rng& rng) {
  bool root_only = tree_.internal_count() == 0;
  int n_prun_before = static_cast<int>(tree_.prunable().size());
  int n_leaves = tree_.leaf_count();

  ProposedSplit prop = propose_split(rng, tree_, *grid_, *data_, leaf_obs_);
  if (!prop.valid) return false;
  int d = tree_.depth(prop.leaf);
  const TreeNode& parent = tree_.node(prop.leaf);

  LeafStats stats_l = stats_of(prop.left);
  LeafStats stats_r = stats_of(prop.right);
  LeafStats stats_b = stats_of(leaf_obs_[static_cast<size_t>(prop.leaf)]);
  LeafContext ctx_l = context_for(stats_l, d + 1);
  LeafContext ctx_r = context_for(stats_r, d + 1);
  LeafContext ctx_b = context_for(stats_b, d);
  double ml_l = marginal_log_lik(ctx_l, mh_window(d + 1));
  double ml_r = marginal_log_lik(ctx_r, mh_window(d + 1));
  double ml_b = marginal_log_lik(ctx_b, mh_window(d));

  double log_a = tree_prior_delta(d) + ml_l + ml_r - ml_b;
  if (mp_.zi) {
    log_a += zi_rho_marginal_log(stats_l.n, stats_l.n1, mp_.h1, mp_.h2) +
             zi_rho_marginal_log(stats_r.n, stats_r.n1, mp_.h1, mp_.h2) -
             zi_rho_marginal_log(stats_b.n, stats_b.n1, mp_.h1, mp_.h2);
  }
  int sibling = -1;
  if (parent.parent >= 0) {
    const TreeNode& gp = tree_.node(parent.parent);
    sibling = (gp.left == prop.leaf) ? gp.right : gp.left;
  }
  int n_prun_after = n_prun_before + 1 - ((sibling >= 0 && tree_.node(sibling).is_leaf()) ? 1 : 0);
  log_a += std::log(probs_.death) - std::log(static_cast<double>(n_prun_after));
  log_a -= std::log(birth_prob(root_only)) - std::log(static_cast<double>(n_leaves));

  if (!(std::log(uniform_real(rng)) < log_a)) return false;

  JointDraw left = marginal_draw(rng, ctx_l, mh_window(d + 1));
  JointDraw right = marginal_draw(rng, ctx_r, mh_window(d + 1));
  double parent_rho = parent.rho;
  auto [lid, rid] = tree_.birth(prop.leaf, prop.rule);
  if (static_cast<size_t>(tree_.capacity()) > leaf_obs_.size())
    leaf_obs_.resize(static_cast<size_t>(tree_.capacity()));
  leaf_obs_[static_cast<size_t>(lid)] = std::move(prop.left);
  leaf_obs_[static_cast<size_t>(rid)] = std::move(prop.right);
  leaf_obs_[static_cast<size_t>(prop.leaf)].clear();
  TreeNode& ln = tree_.node(lid);
  TreeNode& rn = tree_.node(rid);
  ln.lambda = left.lambda;
  ln.k = left.k;
  ln.rho = parent_rho;
  rn.lambda = right.lambda;
  rn.k = right.k;
  rn.rho = parent_rho;
  return true;
}

bool TreeSampler::death_move_mh(Rng& rng) {
  auto prunable = tree_.prunable();
  if (prunable.empty()) return false;
  int nid = prunable[static_cast<size_t>(uniform_int(rng, 0, static_cast<long>(prunable.size()) - 1))];
  const TreeNode& node = tree_.node(nid);
  int d = tree_.depth(nid);

  std::vector<int> merged = leaf_obs_[static_cast<size_t>(node.left)];
  merged.insert(merged.end(), leaf_obs_[static_cast<size_t>(node.right)].begin(),
                leaf_obs_[static_cast<size_t>(node.right)].end());
  LeafStats stats_b = stats_of(merged);
  LeafStats stats_l = stats_of(leaf_obs_[static_cast<size_t>(node.left)]);
  LeafStats stats_r = stats_of(leaf_obs_[static_cast<size_t>(node.right)]);
  LeafContext ctx_b = context_for(stats_b, d);
  LeafContext ctx_l = context_for(stats_l, d + 1);
  LeafContext ctx_r = context_for(stats_r, d + 1);
  double ml_b = marginal_log_lik(ctx_b, mh_window(d));
  double ml_l = marginal_log_lik(ctx_l, mh_window(d + 1));
  double ml_r = marginal_log_lik(ctx_r, mh_window(d + 1));

  bool small_root_only = tree_.internal_count() == 1;
  int n_leaves_small = tree_.leaf_count() - 1;
  double log_a = tree_prior_delta(d) + ml_l + ml_r - ml_b;
  if (mp_.zi) {
    log_a += zi_rho_marginal_log(stats_l.n, stats_l.n1, mp_.h1, mp_.h2) +
             zi_rho_marginal_log(stats_r.n, stats_r.n1, mp_.h1, mp_.h2) -
             zi_rho_marginal_log(stats_b.n, stats_b.n1, mp_.h1, mp_.h2);
  }
  log_a += std::log(probs_.death) - std::log(static_cast<double>(prunable.size()));
  log_a -= std::log(birth_prob(small_root_only)) - std::log(static_cast<double>(n_leaves_small));

  if (!(std::log(uniform_real(rng)) < -log_a)) return false;

  JointDraw collapsed = marginal_draw(rng, ctx_b, mh_window(d));
  double child_rho = tree_.node(node.left).rho;
  leaf_obs_[static_cast<size_t>(node.left)].clear();
  leaf_obs_[static_cast<size_t>(node.right)].clear();
  tree_.death(nid);
  TreeNode& collapsed_node = tree_.node(nid);
  collapsed_node.lambda = collapsed.lambda;
  collapsed_node.k = collapsed.k;
  collapsed_node.rho = child_rho;
  leaf_obs_[static_cast<size_t>(nid)] = std::move(merged);
  return true;
}

bool TreeSampler::perturb_move(Rng& rng) {
  ++counters_.perturb_proposed;
  auto internals = tree_.internals();
  if (internals.empty()) return false;
  int nid = internals[static_cast<size_t>(uniform_int(rng, 0, static_cast<long>(internals.size()) - 1))];
  SplitRule rule = tree_.node(nid).rule;
  long off = uniform_int(rng, 1, 2 * radii_.c);
  off = (off <= radii_.c) ? -off : off - radii_.c;
  int new_cut = rule.cut + static_cast<int>(off);
  if (new_cut < 0 || new_cut >= grid_->size(rule.var)) return false;

  // gather the subtree's leaves and observations; only their partition changes
  std::vector<int> subtree_leaves;
  std::vector<int> stack{nid};
  std::vector<int> obs;
  while (!stack.empty()) {
    int id = stack.back();
    stack.pop_back();
    const TreeNode& n = tree_.node(id);
    if (n.is_leaf()) {
      subtree_leaves.push_back(id);
      const auto& lo = leaf_obs_[static_cast<size_t>(id)];
      obs.insert(obs.end(), lo.begin(), lo.end());
    } else {
      stack.push_back(n.right);
      stack.push_back(n.left);
    }
  }

  // re-route with the perturbed rule
  std::vector<std::vector<int>> new_obs(subtree_leaves.size());
  std::vector<int> leaf_slot(static_cast<size_t>(tree_.capacity()), -1);
  for (size_t s = 0; s < subtree_leaves.size(); ++s)
    leaf_slot[static_cast<size_t>(subtree_leaves[s])] = static_cast<int>(s);
  double new_value = grid_->value(rule.var, new_cut);
  for (int i : obs) {
    const auto& row = data_->x[static_cast<size_t>(i)];
    int id = nid;
    while (!tree_.node(id).is_leaf()) {
      const TreeNode& n = tree_.node(id);
      double cut_value = (id == nid) ? new_value : grid_->value(n.rule.var, n.rule.cut);
      id = (row[static_cast<size_t>(n.rule.var)] < cut_value) ? n.left : n.right;
    }
    new_obs[static_cast<size_t>(leaf_slot[static_cast<size_t>(id)])].push_back(i);
  }
  for (const auto& lo : new_obs) {
    if (lo.empty()) return false;
  }

  // parameters fixed: the ratio is the likelihood change of the affected leaves
  double log_a = 0.0;
  for (size_t s = 0; s < subtree_leaves.size(); ++s) {
    int id = subtree_leaves[s];
    const TreeNode& n = tree_.node(id);
    LeafStats old_stats = stats_of(leaf_obs_[static_cast<size_t>(id)]);
    LeafStats new_stats = stats_of(new_obs[s]);
    log_a += move_leaf_ll(new_stats, n.lambda, n.k) - move_leaf_ll(old_stats, n.lambda, n.k);
  }

  if (!(std::log(uniform_real(rng)) < log_a)) return false;

  tree_.node(nid).rule.cut = new_cut;
  for (size_t s = 0; s < subtree_leaves.size(); ++s)
    leaf_obs_[static_cast<size_t>(subtree_leaves[s])] = std::move(new_obs[s]);
  ++counters_.perturb_accepted;
  return true;
}

void TreeSampler::tc_update_leaf(Rng& rng, int leaf_id) {
  TreeNode& node = tree_.node(leaf_id);
  int d = tree_.depth(leaf_id);
  LeafStats stats = stats_of(leaf_obs_[static_cast<size_t>(leaf_id)]);
  LeafContext ctx = context_for(stats, d);
  long ml = radii_.m_lambda;
  long mk = radii_.m_k;

  // location: fresh auxiliary, then an exact draw from the slice; the weight
  // carries the scale prior re-evaluated at each candidate location
  long u = node.lambda + uniform_int(rng, -ml, ml);
  std::vector<double> w(static_cast<size_t>(2 * ml + 1), kNegInf);
  for (long j = -ml; j <= ml; ++j) {
    long cand = u + j;
    if (ctx.loc->log_pmf(cand) == kNegInf) continue;
    w[static_cast<size_t>(j + ml)] = joint_weight(ctx, cand, node.k);
  }
  int pick = categorical_from_log(rng, w);
  if (pick < 0) throw std::runtime_error("tree model: location slice has no mass");
  node.lambda = u + pick - ml;

  // scale, conditional on the fresh location
  long r = node.k + uniform_int(rng, -mk, mk);
  w.assign(static_cast<size_t>(2 * mk + 1), kNegInf);
  for (long j = -mk; j <= mk; ++j) {
    long cand = r + j;
    w[static_cast<size_t>(j + mk)] = tent_log_pmf(cand, ctx.prior_tent(node.lambda)) +
                                     leaf_log_lik(stats, node.lambda, cand, mp_.t);
  }
  pick = categorical_from_log(rng, w);
  if (pick < 0) throw std::runtime_error("tree model: scale slice has no mass");
  node.k = r + pick - mk;
}

void TreeSampler::mh_update_leaf(Rng& rng, int leaf_id) {
  TreeNode& node = tree_.node(leaf_id);
  int d = tree_.depth(leaf_id);
  LeafStats stats = stats_of(leaf_obs_[static_cast<size_t>(leaf_id)]);
  LeafContext ctx = context_for(stats, d);

  long off = uniform_int(rng, 1, 2 * radii_.lambda);
  long cand = node.lambda + ((off <= radii_.lambda) ? -off : off - radii_.lambda);
  double delta = joint_weight(ctx, cand, node.k) - joint_weight(ctx, node.lambda, node.k);
  if (std::log(uniform_real(rng)) < delta) node.lambda = cand;

  off = uniform_int(rng, 1, 2 * radii_.k);
  cand = node.k + ((off <= radii_.k) ? -off : off - radii_.k);
  double cur = tent_log_pmf(node.k, ctx.prior_tent(node.lambda)) +
               leaf_log_lik(stats, node.lambda, node.k, mp_.t);
  double prop = tent_log_pmf(cand, ctx.prior_tent(node.lambda)) +
                leaf_log_lik(stats, node.lambda, cand, mp_.t);
  if (std::log(uniform_real(rng)) < prop - cur) node.k = cand;
}

void TreeSampler::update_leaf_params(Rng& rng) {
  for (int leaf : tree_.leaves()) {
    if (kind_ == SamplerKind::tc) {
      tc_update_leaf(rng, leaf);
    } else {
      mh_update_leaf(rng, leaf);
    }
  }
}

void TreeSampler::update_z(Rng& rng) {
  for (int leaf : tree_.leaves()) {
    const TreeNode& node = tree_.node(leaf);
    double p0 = std::exp(tent_log_pmf(0, TentParams{node.lambda, effective_scale(node.k), mp_.t}));
    for (int i : leaf_obs_[static_cast<size_t>(leaf)]) {
      if (data_->y[static_cast<size_t>(i)] > 0) {
        z_[static_cast<size_t>(i)] = 0;
        continue;
      }
      double denom = node.rho + (1.0 - node.rho) * p0;
      double pz1 = (denom > 0.0) ? node.rho / denom : (node.rho > 0.0 ? 1.0 : 0.0);
      z_[static_cast<size_t>(i)] = bernoulli(rng, pz1) ? 1 : 0;
    }
  }
}

void TreeSampler::update_rho(Rng& rng) {
  for (int leaf : tree_.leaves()) {
    long n = 0, n1 = 0;
    for (int i : leaf_obs_[static_cast<size_t>(leaf)]) {
      ++n;
      n1 += z_[static_cast<size_t>(i)];
    }
    tree_.node(leaf).rho =
        beta_draw(rng, mp_.h1 + static_cast<double>(n1), mp_.h2 + static_cast<double>(n - n1));
  }
}

void TreeSampler::step(Rng& rng) {
  if (mp_.zi) update_z(rng);
  bool root_only = tree_.internal_count() == 0;
  double pb = birth_prob(root_only);
  double pd = root_only ? 0.0 : probs_.death;
  double u = uniform_real(rng);
  if (u < pb) {
    birth_move(rng);
  } else if (u < pb + pd) {
    death_move(rng);
  } else {
    perturb_move(rng);
  }
  update_leaf_params(rng);
  if (mp_.zi) update_rho(rng);
}

double TreeSampler::log_posterior() const {
  double lp = 0.0;
  const TreePrior& tp = mp_.tree_prior;
  for (int id : tree_.internals()) {
    int d = tree_.depth(id);
    lp += tp.log_split(d) -
          std::log(static_cast<double>(grid_->vars()) *
                   static_cast<double>(grid_->size(tree_.node(id).rule.var)));
  }
  for (int id : tree_.leaves()) {
    int d = tree_.depth(id);
    lp += tp.log_stay(d);
    const TreeNode& node = tree_.node(id);
    LeafStats stats = stats_of(leaf_obs_[static_cast<size_t>(id)]);
    lp += mp_.loc.log_pmf(node.lambda) + mp_.scale.log_pmf(node.k, node.lambda, d) +
          leaf_log_lik(stats, node.lambda, node.k, mp_.t);
    if (mp_.zi) {
      double lr = std::log(node.rho);
      double lr1 = std::log1p(-node.rho);
      double e1 = static_cast<double>(stats.n1) + mp_.h1 - 1.0;
      double e0 = static_cast<double>(stats.n - stats.n1) + mp_.h2 - 1.0;
      if (e1 != 0.0) lp += e1 * lr;
      if (e0 != 0.0) lp += e0 * lr1;
      lp += std::lgamma(mp_.h1 + mp_.h2) - std::lgamma(mp_.h1) - std::lgamma(mp_.h2);
    }
  }
  return lp;
}

std::vector<long> TreeSampler::fitted() const {
  std::vector<long> g(static_cast<size_t>(data_->n()), 0);
  for (int id : tree_.leaves()) {
    for (int i : leaf_obs_[static_cast<size_t>(id)]) {
      g[static_cast<size_t>(i)] = tree_.node(id).lambda;
    }
  }
  return g;
}

namespace {

void topology_walk(const Tree& tree, int id, std::string& out) {
  const TreeNode& n = tree.node(id);
  if (n.is_leaf()) {
    out += 'L';
    return;
  }
  out += 'S';
  out += std::to_string(n.rule.var);
  out += ':';
  out += std::to_string(n.rule.cut);
  out += '(';
  topology_walk(tree, n.left, out);
  out += ')';
  out += '(';
  topology_walk(tree, n.right, out);
  out += ')';
}

}  // namespace

std::string TreeSampler::topology_key() const {
  std::string out;
  topology_walk(tree_, tree_.root(), out);
  return out;
}

namespace {

void json_walk(const Tree& tree, const CutpointGrid& grid, bool zi, int id, std::string& out) {
  const TreeNode& n = tree.node(id);
  std::ostringstream os;
  if (n.is_leaf()) {
    os << "{\"type\":\"leaf\",\"lambda\":" << n.lambda << ",\"k\":" << n.k;
    if (zi) os << ",\"rho\":" << n.rho;
    os << "}";
    out += os.str();
    return;
  }
  os << "{\"type\":\"split\",\"var\":" << n.rule.var << ",\"cut_index\":" << n.rule.cut
     << ",\"cut\":" << grid.value(n.rule.var, n.rule.cut) << "}";
  out += os.str();
  out += ',';
  json_walk(tree, grid, zi, n.left, out);
  out += ',';
  json_walk(tree, grid, zi, n.right, out);
}

}  // namespace

std::string TreeSampler::tree_json() const {
  std::string out = "[";
  json_walk(tree_, *grid_, mp_.zi, tree_.root(), out);
  out += "]";
  return out;
}

LeafStats TreeSampler::leaf_stats(int leaf_id) const {
  return stats_of(leaf_obs_[static_cast<size_t>(leaf_id)]);
}

const std::vector<int>& TreeSampler::leaf_observations(int leaf_id) const {
  return leaf_obs_[static_cast<size_t>(leaf_id)];
}

std::vector<int> TreeSampler::route_all() const {
  std::vector<int> assignment(static_cast<size_t>(data_->n()), -1);
  for (int i = 0; i < data_->n(); ++i)
    assignment[static_cast<size_t>(i)] = route(tree_, *grid_, data_->x[static_cast<size_t>(i)]);
  return assignment;
}

}  // namespace taxicab
