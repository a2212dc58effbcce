#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <utility>
#include <vector>

#include "taxicab/priors.hpp"
#include "taxicab/rng.hpp"
#include "taxicab/tree.hpp"

namespace taxicab {

struct Dataset {
  std::vector<std::vector<double>> x;  // n rows of p covariates
  std::vector<long> y;
  std::vector<long> g_true;            // synthetic truth, may be empty
  std::vector<std::uint8_t> z_true;    // synthetic ZI indicators, may be empty

  int n() const { return static_cast<int>(y.size()); }
  int p() const { return x.empty() ? 0 : static_cast<int>(x.front().size()); }
};

struct ModelParams {
  double t = 0.025;  // likelihood tail mass
  LocationPrior loc;
  ScalePrior scale;
  TreePrior tree_prior;
  bool zi = false;
  double h1 = 1.0;
  double h2 = 1.0;

  void validate() const;
};

enum class SamplerKind { tc, mh };

struct MoveRadii {
  long m_lambda = 4;  // taxicab slice radius for leaf locations
  long m_k = 2;       // taxicab slice radius for leaf scales
  long lambda = 4;    // MH proposal radius for leaf locations
  long k = 2;         // MH proposal radius for leaf scales
  long c = 25;        // cutpoint perturb radius, in grid indices
};

struct MoveProbs {
  double birth = 0.25;
  double death = 0.25;
  double perturb = 0.5;
};

struct MoveCounters {
  long birth_proposed = 0, birth_accepted = 0;
  long death_proposed = 0, death_accepted = 0;
  long perturb_proposed = 0, perturb_accepted = 0;

  void add(const MoveCounters& o);
};

// Response histogram of the observations a leaf models (ZI: Z_i = 1 rows are
// excluded from the histogram but counted in n1).
struct LeafStats {
  std::vector<std::pair<long, int>> hist;
  long n = 0;   // observations routed to the leaf
  long n1 = 0;  // of which latent structural zeros (ZI)
};

// Sum of tent log masses over the histogram; the raw scale k is exponentiated.
double leaf_log_lik(const LeafStats& stats, long lambda, long k, double t);

// Integer dimension-matching pair: one value plus an offset scalar maps to two
// values and back. match_merge(match_split(theta, a)) == (theta, a) exactly.
std::pair<long, long> match_split(long theta, long a);  // (theta-floor(a/2), theta+ceil(a/2))
std::pair<long, long> match_merge(long x, long y);      // (floor((x+y)/2), y-x)

// Log of the Beta-binomial factor left after integrating the leaf zero
// probability against its Beta(h1, h2) prior.
double zi_rho_marginal_log(long n, long n1, double h1, double h2);

// Full rho-marginalized leaf likelihood: the factor above times the tent
// masses of the leaf's modeled observations.
double zi_rho_marginal_leaf_lik(const LeafStats& stats, long lambda, long k, double h1, double h2,
                                double t);

// Everything needed to weigh one leaf's (lambda, k) pair.
struct LeafContext {
  const LeafStats* stats = nullptr;
  const LocationPrior* loc = nullptr;
  const ScalePrior* scale = nullptr;
  double t = 0.0;
  int depth = 0;

  double scale_denom = 1.0;  // (1+depth)^beta_k, cached
  long scale_loc = 0;        // floor(kappa / 2^depth), cached

  static LeafContext make(const LeafStats& stats, const ModelParams& mp, int depth);
  TentParams prior_tent(long lambda) const;
};

// log [ L(lambda, k) pi(lambda) pi(k | lambda, depth) ]
double joint_weight(const LeafContext& ctx, long lambda, long k);

struct JointDraw {
  long lambda = 0;
  long k = 0;
  double log_sum = 0.0;  // log normalizer of the enumerated candidate set
};

// Product-neighborhood slice around (u, r): exact enumeration of the
// (2 m_lambda + 1)(2 m_k + 1) candidates in log space.
double joint_slice_sum(const LeafContext& ctx, long u, long r, long m_lambda, long m_k);
JointDraw joint_slice_draw(Rng& rng, const LeafContext& ctx, long u, long r, long m_lambda,
                           long m_k);

// Exhaustive marginalization over the location prior support and a scale
// window [scale_loc - w, scale_loc + w], for the naive-MH baseline.
double marginal_log_lik(const LeafContext& ctx, long k_window);
JointDraw marginal_draw(Rng& rng, const LeafContext& ctx, long k_window);
long marginal_candidate_count(const LeafContext& ctx, long k_window);

// One MCMC chain for the single-tree count model (taxicab or naive-MH moves,
// optional zero-inflated extension).
class TreeSampler {
 public:
  TreeSampler(const Dataset& data, const CutpointGrid& grid, const ModelParams& params,
              SamplerKind kind, MoveRadii radii, MoveProbs probs = MoveProbs{});

  void step(Rng& rng);

  const Tree& tree() const { return tree_; }
  Tree& tree_for_tests() { return tree_; }
  int leaf_count() const { return tree_.leaf_count(); }
  const std::vector<std::uint8_t>& z() const { return z_; }
  const MoveCounters& counters() const { return counters_; }

  double log_posterior() const;
  std::vector<long> fitted() const;
  std::string topology_key() const;
  std::string tree_json() const;

  long mh_window(int depth) const;
  LeafStats leaf_stats(int leaf_id) const;
  const std::vector<int>& leaf_observations(int leaf_id) const;

  // routing from scratch, for coherence checks
  std::vector<int> route_all() const;

  // individual updates, exposed for tests and oracles
  bool birth_move(Rng& rng);
  bool death_move(Rng& rng);
  bool perturb_move(Rng& rng);
  void update_leaf_params(Rng& rng);
  void update_z(Rng& rng);
  void update_rho(Rng& rng);

 private:
  LeafStats stats_of(const std::vector<int>& obs) const;
  LeafContext context_for(const LeafStats& stats, int depth) const;
  double tree_prior_delta(int depth) const;
  double birth_prob(bool root_only) const;
  bool birth_move_tc(Rng& rng);
  bool birth_move_mh(Rng& rng);
  bool death_move_tc(Rng& rng);
  bool death_move_mh(Rng& rng);
  void tc_update_leaf(Rng& rng, int leaf_id);
  void mh_update_leaf(Rng& rng, int leaf_id);
  double move_leaf_ll(const LeafStats& stats, long lambda, long k) const;

  const Dataset* data_;
  const CutpointGrid* grid_;
  ModelParams mp_;
  SamplerKind kind_;
  MoveRadii radii_;
  MoveProbs probs_;

  Tree tree_;
  std::vector<std::vector<int>> leaf_obs_;  // indexed by node id
  std::vector<std::uint8_t> z_;
  MoveCounters counters_;

  long y_min_ = 0;
  long y_max_ = 0;
  std::vector<long> mh_window_;  // per depth
  mutable std::vector<int> count_scratch_;
};

}  // namespace taxicab
