#include "taxicab/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <chrono>
#include <cmath>
#include <stdexcept>
#include <thread>

#include "taxicab/numeric.hpp"
#include "taxicab/sampler.hpp"
#include "taxicab/tent.hpp"

namespace taxicab {

namespace {

int resolve_workers(int workers) {
  if (workers > 0) return workers;
  unsigned hc = std::thread::hardware_concurrency();
  return hc == 0 ? 1 : static_cast<int>(hc);
}

// chunked parallel-for over chain indices; each body call owns its state
template <typename Body>
void parallel_chains(int n_chains, int workers, Body&& body) {
  workers = std::min(resolve_workers(workers), n_chains);
  if (workers <= 1) {
    for (int c = 0; c < n_chains; ++c) body(c);
    return;
  }
  std::vector<std::thread> pool;
  std::atomic<int> next{0};
  for (int w = 0; w < workers; ++w) {
    pool.emplace_back([&]() {
      while (true) {
        int c = next.fetch_add(1);
        if (c >= n_chains) break;
        body(c);
      }
    });
  }
  for (auto& th : pool) th.join();
}

}  // namespace

Dataset generate_tree_data(Rng& rng, int n) {
  if (n < 1) throw std::invalid_argument("generate_tree_data: need n >= 1");
  Dataset data;
  data.x.resize(static_cast<size_t>(n));
  data.y.resize(static_cast<size_t>(n));
  data.g_true.resize(static_cast<size_t>(n));
  long k_eff = effective_scale(2);
  for (int i = 0; i < n; ++i) {
    double x1 = 10.0 * uniform_real(rng);
    double x2 = 10.0 * uniform_real(rng);
    long g = (x1 <= 5.0) ? (x2 <= 5.0 ? 10 : 20) : (x2 <= 5.0 ? 30 : 40);
    data.x[static_cast<size_t>(i)] = {x1, x2};
    data.g_true[static_cast<size_t>(i)] = g;
    data.y[static_cast<size_t>(i)] = tent_sample(rng, TentParams{g, k_eff, 0.0});
  }
  return data;
}

Dataset generate_zi_data(Rng& rng, int n) {
  if (n < 1) throw std::invalid_argument("generate_zi_data: need n >= 1");
  Dataset data;
  data.x.resize(static_cast<size_t>(n));
  data.y.resize(static_cast<size_t>(n));
  data.g_true.resize(static_cast<size_t>(n));
  data.z_true.resize(static_cast<size_t>(n));
  for (int i = 0; i < n; ++i) {
    double x1 = 10.0 * uniform_real(rng);
    double x2 = 10.0 * uniform_real(rng);
    long g1;
    long g2;
    double g3;
    if (x1 <= 5.0 && x2 <= 5.0) {
      g1 = 2; g2 = 1; g3 = 0.3;
    } else if (x1 <= 5.0) {
      g1 = 3; g2 = 1; g3 = 0.0;
    } else if (x2 <= 5.0) {
      g1 = 1; g2 = 0; g3 = 0.0;
    } else {
      g1 = 7; g2 = 2; g3 = 0.2;
    }
    data.x[static_cast<size_t>(i)] = {x1, x2};
    data.g_true[static_cast<size_t>(i)] = g1;
    bool structural_zero = bernoulli(rng, g3);
    data.z_true[static_cast<size_t>(i)] = structural_zero ? 1 : 0;
    data.y[static_cast<size_t>(i)] =
        structural_zero ? 0 : tent_sample(rng, TentParams{g1, effective_scale(g2), 0.0});
  }
  return data;
}

namespace {

struct ChainOutput {
  std::vector<PosteriorDraw> draws;
  std::map<std::string, long> topology_counts;
  MoveCounters counters;
  double seconds = 0.0;
  double chain_mae = 0.0;
  double chain_l2 = 0.0;
  long kept = 0;
};

}  // namespace

TreeFitResult run_tree_fit(const Dataset& data, const CutpointGrid& grid, const ModelParams& params,
                           SamplerKind kind, MoveRadii radii, const ChainPlan& plan) {
  if (plan.n_chains < 1) throw std::invalid_argument("run_tree_fit: need at least one chain");
  if (plan.burn_in >= plan.n_iters && plan.n_iters > 0)
    throw std::invalid_argument("run_tree_fit: burn-in swallows every iteration");
  long kept_per_chain = std::max<long>(0, plan.n_iters - plan.burn_in);
  long thin = plan.thin;
  if (thin <= 0) {
    long total = kept_per_chain * plan.n_chains;
    thin = std::max<long>(1, total / 1000);
  }

  std::vector<ChainOutput> outputs(static_cast<size_t>(plan.n_chains));
  parallel_chains(plan.n_chains, plan.workers, [&](int c) {
    Rng rng = make_rng(plan.base_seed + static_cast<std::uint64_t>(c));
    TreeSampler sampler(data, grid, params, kind, radii);
    ChainOutput& out = outputs[static_cast<size_t>(c)];
    auto t0 = std::chrono::steady_clock::now();
    for (long it = 0; it < plan.n_iters; ++it) {
      sampler.step(rng);
      if (it >= plan.burn_in) {
        ++out.topology_counts[sampler.topology_key()];
        if ((it - plan.burn_in) % thin == 0) {
          PosteriorDraw draw;
          draw.chain = c;
          draw.iter = it;
          draw.log_post = sampler.log_posterior();
          draw.leaves = sampler.leaf_count();
          draw.tree_json = sampler.tree_json();
          draw.g_hat = sampler.fitted();
          out.draws.push_back(std::move(draw));
        }
      }
    }
    auto t1 = std::chrono::steady_clock::now();
    out.seconds = std::chrono::duration<double>(t1 - t0).count();
    out.counters = sampler.counters();
    // per-chain fit metrics for the between-chain spread
    if (!out.draws.empty()) {
      std::vector<std::vector<double>> g;
      for (const auto& d : out.draws) g.emplace_back(d.g_hat.begin(), d.g_hat.end());
      out.chain_mae = mae(g, data.y);
      if (!data.g_true.empty()) out.chain_l2 = l2_norm(g, data.g_true);
      out.kept = static_cast<long>(out.draws.size());
    }
  });

  TreeFitResult res;
  std::vector<std::vector<double>> pooled_g;
  std::vector<double> chain_maes, chain_l2s;
  for (auto& out : outputs) {
    res.runtime_sec += out.seconds;
    res.counters.add(out.counters);
    for (const auto& [key, count] : out.topology_counts) res.topology_counts[key] += count;
    if (out.kept > 0) {
      chain_maes.push_back(out.chain_mae);
      chain_l2s.push_back(out.chain_l2);
    }
    for (auto& d : out.draws) {
      pooled_g.emplace_back(d.g_hat.begin(), d.g_hat.end());
      res.draws.push_back(std::move(d));
    }
  }
  if (!pooled_g.empty()) {
    res.mae_value = mae(pooled_g, data.y);
    if (!data.g_true.empty()) res.l2_value = l2_norm(pooled_g, data.g_true);
  }
  auto spread = [](const std::vector<double>& v, bool standard_error) {
    if (v.size() < 2) return 0.0;
    double m = 0.0;
    for (double x : v) m += x;
    m /= static_cast<double>(v.size());
    double ss = 0.0;
    for (double x : v) ss += (x - m) * (x - m);
    double sd = std::sqrt(ss / static_cast<double>(v.size() - 1));
    return standard_error ? sd / std::sqrt(static_cast<double>(v.size())) : sd;
  };
  res.mae_se = spread(chain_maes, true);
  res.l2_sd = spread(chain_l2s, false);

  // modal (topology, rules) key, ties broken by first occurrence in key order
  for (const auto& [key, count] : res.topology_counts) {
    if (count > res.modal_count) {
      res.modal_count = count;
      res.modal_topology = key;
    }
  }
  res.modal_leaves = static_cast<int>(std::count(res.modal_topology.begin(),
                                                 res.modal_topology.end(), 'L'));
  std::vector<int> vars;
  for (size_t i = 0; i < res.modal_topology.size(); ++i) {
    if (res.modal_topology[i] == 'S') {
      size_t j = i + 1;
      int v = 0;
      while (j < res.modal_topology.size() && res.modal_topology[j] >= '0' &&
             res.modal_topology[j] <= '9') {
        v = 10 * v + (res.modal_topology[j] - '0');
        ++j;
      }
      if (std::find(vars.begin(), vars.end(), v) == vars.end()) vars.push_back(v);
    }
  }
  std::sort(vars.begin(), vars.end());
  res.modal_vars = vars;

  if (kind == SamplerKind::mh) {
    TreeSampler probe(data, grid, params, kind, radii);
    for (int d = 0; d <= 8; ++d) res.mh_windows.push_back(probe.mh_window(d));
  }
  return res;
}

namespace {

struct UniChainResult {
  std::vector<UnivariateRow> rows;
};

class VisitCounts {
 public:
  void add(long state) {
    if (state < 0) throw std::logic_error("univariate chain left the support");
    if (static_cast<size_t>(state) >= counts_.size()) counts_.resize(static_cast<size_t>(state) + 1, 0);
    ++counts_[static_cast<size_t>(state)];
    largest_ = std::max(largest_, state);
    ++total_;
  }
  Pmf pmf() const {
    Pmf out;
    for (size_t s = 0; s < counts_.size(); ++s) {
      if (counts_[s] > 0)
        out[static_cast<long>(s)] = static_cast<double>(counts_[s]) / static_cast<double>(total_);
    }
    return out;
  }
  long largest() const { return largest_; }

 private:
  std::vector<long> counts_;
  long largest_ = 0;
  long total_ = 0;
};

}  // namespace

UnivariateResult run_univariate(const UnivariateConfig& cfg) {
  cfg.target.validate();
  if (cfg.n_chains < 1 || cfg.n_iters < 1)
    throw std::invalid_argument("run_univariate: need chains and iterations");

  MultimodalTarget tgt = cfg.target;
  // memoized log target: the chains live near the origin
  std::vector<double> table(2048);
  for (long s = 0; s < static_cast<long>(table.size()); ++s)
    table[static_cast<size_t>(s)] = multimodal_log_unnorm(s, tgt);
  auto log_target = [&](long s) -> double {
    if (s < 0) return kNegInf;
    if (s < static_cast<long>(table.size())) return table[static_cast<size_t>(s)];
    return multimodal_log_unnorm(s, tgt);
  };

  std::vector<long> checkpoints;
  for (long cp : cfg.checkpoints) {
    if (cp >= 1 && cp <= cfg.n_iters) checkpoints.push_back(cp);
  }
  if (checkpoints.empty() || checkpoints.back() != cfg.n_iters) checkpoints.push_back(cfg.n_iters);

  UnivariateResult res;
  res.truth = truncated_pmf(log_target, 0);

  std::vector<UniChainResult> chains(static_cast<size_t>(cfg.n_chains));
  parallel_chains(cfg.n_chains, cfg.workers, [&](int c) {
    Rng rng = make_rng(cfg.base_seed + static_cast<std::uint64_t>(c));
    long start = uniform_int(rng, cfg.start_lo, cfg.start_hi);
    Rng mh_rng = make_rng(cfg.base_seed + 0x9E3779B97F4A7C15ull * (static_cast<std::uint64_t>(c) + 1));

    auto run_one = [&](bool tc, Rng& chain_rng) {
      VisitCounts visits;
      long state = start;
      size_t next_cp = 0;
      std::vector<UnivariateRow> rows;
      for (long it = 1; it <= cfg.n_iters; ++it) {
        state = tc ? tc_step_1d(chain_rng, state, cfg.tc_m, log_target)
                   : mh_rw_step_1d(chain_rng, state, cfg.mh_radius, log_target);
        visits.add(state);
        if (next_cp < checkpoints.size() && it == checkpoints[next_cp]) {
          Pmf hat = visits.pmf();
          UnivariateRow row;
          row.sampler = tc ? "tc" : "mh";
          row.chain = c;
          row.iteration = it;
          row.tv = tv_distance(hat, res.truth);
          row.he = hellinger_distance(hat, res.truth);
          row.tv_even = conditional_distance(hat, res.truth, Parity::even, DistanceKind::tv);
          row.tv_odd = conditional_distance(hat, res.truth, Parity::odd, DistanceKind::tv);
          row.he_even = conditional_distance(hat, res.truth, Parity::even, DistanceKind::hellinger);
          row.he_odd = conditional_distance(hat, res.truth, Parity::odd, DistanceKind::hellinger);
          row.largest = visits.largest();
          rows.push_back(row);
          ++next_cp;
        }
      }
      return rows;
    };

    UniChainResult& out = chains[static_cast<size_t>(c)];
    auto tc_rows = run_one(true, rng);
    auto mh_rows = run_one(false, mh_rng);
    out.rows = std::move(tc_rows);
    out.rows.insert(out.rows.end(), mh_rows.begin(), mh_rows.end());
  });

  for (auto& ch : chains) {
    res.rows.insert(res.rows.end(), ch.rows.begin(), ch.rows.end());
  }

  for (const char* sampler : {"tc", "mh"}) {
    for (long cp : checkpoints) {
      UnivariateSummary s;
      s.sampler = sampler;
      s.iteration = cp;
      long count = 0;
      for (const auto& row : res.rows) {
        if (row.sampler == sampler && row.iteration == cp) {
          s.tv += row.tv;
          s.tv_even += row.tv_even;
          s.tv_odd += row.tv_odd;
          s.he += row.he;
          s.he_even += row.he_even;
          s.he_odd += row.he_odd;
          s.largest_mean += static_cast<double>(row.largest);
          ++count;
        }
      }
      if (count > 0) {
        double dn = static_cast<double>(count);
        s.tv /= dn;
        s.tv_even /= dn;
        s.tv_odd /= dn;
        s.he /= dn;
        s.he_even /= dn;
        s.he_odd /= dn;
        s.largest_mean /= dn;
        res.summary.push_back(s);
      }
    }
  }
  return res;
}

}  // namespace taxicab
