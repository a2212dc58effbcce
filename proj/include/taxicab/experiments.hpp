#pragma once

#include <cstdint>
#include <map>
#include <string>
#include <vector>

#include "taxicab/metrics.hpp"
#include "taxicab/multimodal.hpp"
#include "taxicab/tree_model.hpp"

namespace taxicab {

// Two-covariate step-function generator: means (10, 20, 30, 40) on the
// quadrants split at 5, tent scale floor(e^2) = 7, zero tail mass,
// covariates uniform on (0, 10).
Dataset generate_tree_data(Rng& rng, int n);

// Zero-inflated variant: per-quadrant (location, raw scale, zero probability)
// of (2,1,0.3), (3,1,0), (1,0,0), (7,2,0.2).
Dataset generate_zi_data(Rng& rng, int n);

struct ChainPlan {
  int n_chains = 20;
  long n_iters = 3000;
  long burn_in = 500;
  long thin = 0;  // 0: pick so that ~1000 draws are pooled across chains
  std::uint64_t base_seed = 1;
  int workers = 0;  // 0: hardware concurrency
};

struct PosteriorDraw {
  int chain = 0;
  long iter = 0;
  double log_post = 0.0;
  int leaves = 0;
  std::string tree_json;
  std::vector<long> g_hat;
};

struct TreeFitResult {
  std::vector<PosteriorDraw> draws;
  double runtime_sec = 0.0;  // sampling loops only, summed over chains
  double mae_value = 0.0;
  double l2_value = 0.0;
  double mae_se = 0.0;  // between-chain standard error of per-chain MAE
  double l2_sd = 0.0;   // between-chain standard deviation of per-chain L2
  std::string modal_topology;
  int modal_leaves = 0;
  std::vector<int> modal_vars;
  long modal_count = 0;
  std::map<std::string, long> topology_counts;
  MoveCounters counters;
  std::vector<long> mh_windows;  // per-depth marginalization metadata (MH runs)
};

TreeFitResult run_tree_fit(const Dataset& data, const CutpointGrid& grid, const ModelParams& params,
                           SamplerKind kind, MoveRadii radii, const ChainPlan& plan);

struct UnivariateConfig {
  int n_chains = 20;
  long n_iters = 100000;
  long tc_m = 1;
  long mh_radius = 1;
  MultimodalTarget target;
  long start_lo = 0;
  long start_hi = 20;
  std::vector<long> checkpoints = {100, 1000, 10000, 100000, 1000000};
  std::uint64_t base_seed = 1;
  int workers = 0;
};

struct UnivariateRow {
  std::string sampler;
  int chain = 0;
  long iteration = 0;
  double tv = 0.0, tv_even = 0.0, tv_odd = 0.0;
  double he = 0.0, he_even = 0.0, he_odd = 0.0;
  long largest = 0;
};

struct UnivariateSummary {
  std::string sampler;
  long iteration = 0;
  double tv = 0.0, tv_even = 0.0, tv_odd = 0.0;
  double he = 0.0, he_even = 0.0, he_odd = 0.0;
  double largest_mean = 0.0;
};

struct UnivariateResult {
  std::vector<UnivariateRow> rows;          // per chain x checkpoint x sampler
  std::vector<UnivariateSummary> summary;   // chain means per checkpoint
  Pmf truth;
};

// Paired chains from shared random starting states; the empirical pmfs are
// cumulative visit counts from iteration one (no burn-in discard here).
UnivariateResult run_univariate(const UnivariateConfig& cfg);

}  // namespace taxicab
