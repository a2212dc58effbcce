#include <cmath>
#include <cstdlib>
#include <map>

#include "doctest.h"
#include "taxicab/numeric.hpp"
#include "taxicab/tent.hpp"
#include "taxicab/tree_model.hpp"
#include "toy_support.hpp"

using namespace taxicab;

namespace {

LeafStats stats_from_values(const std::vector<long>& ys) {
  std::map<long, int> counts;
  for (long v : ys) ++counts[v];
  LeafStats s;
  s.n = static_cast<long>(ys.size());
  for (const auto& [v, c] : counts) s.hist.emplace_back(v, c);
  return s;
}

}  // namespace

TEST_SUITE("tree_model") {

TEST_CASE("leaf log likelihood basics") {
  CHECK(leaf_log_lik(LeafStats{}, 3, 0, 0.025) == 0.0);  // empty product
  // one observation at the mode with zero effective scale and no tails
  LeafStats one = stats_from_values({5});
  CHECK(leaf_log_lik(one, 5, -1, 0.0) == 0.0);
  // frozen pair from the tent cases: k = 1 gives floor(e) = 2
  LeafStats pair = stats_from_values({0, 3});
  double expect = std::log(0.95 * 3.0 / 9.0) + std::log(0.02475);
  CHECK(leaf_log_lik(pair, 0, 1, 0.025) == doctest::Approx(expect).epsilon(1e-12));
}

TEST_CASE("likelihood factorizes over leaves") {
  auto toy = toy::make_toy(false);
  MoveRadii radii;
  radii.m_lambda = 2;
  radii.m_k = 1;
  radii.c = 1;
  TreeSampler sampler(toy.data, toy.grid, toy.params, SamplerKind::tc, radii);
  Rng rng = make_rng(41);
  for (int i = 0; i < 500; ++i) sampler.step(rng);

  double total = 0.0;
  for (int leaf : sampler.tree().leaves()) {
    const TreeNode& node = sampler.tree().node(leaf);
    total += leaf_log_lik(sampler.leaf_stats(leaf), node.lambda, node.k, toy.params.t);
  }
  double direct = 0.0;
  auto assign = sampler.route_all();
  for (int i = 0; i < toy.data.n(); ++i) {
    const TreeNode& node = sampler.tree().node(assign[static_cast<size_t>(i)]);
    direct += tent_log_pmf(toy.data.y[static_cast<size_t>(i)],
                           TentParams{node.lambda, effective_scale(node.k), toy.params.t});
  }
  CHECK(total == doctest::Approx(direct).epsilon(1e-9));
}

TEST_CASE("partition stays coherent under every move") {
  auto toy = toy::make_toy(false);
  MoveRadii radii;
  radii.m_lambda = 2;
  radii.m_k = 1;
  radii.c = 2;
  TreeSampler sampler(toy.data, toy.grid, toy.params, SamplerKind::tc, radii);
  Rng rng = make_rng(43);
  for (int rep = 0; rep < 2000; ++rep) {
    sampler.step(rng);
    auto assign = sampler.route_all();
    for (int leaf : sampler.tree().leaves()) {
      for (int i : sampler.leaf_observations(leaf)) {
        REQUIRE(assign[static_cast<size_t>(i)] == leaf);
      }
    }
  }
}

TEST_CASE("location slice respects the prior support") {
  auto toy = toy::make_toy(false);
  TreeSampler probe(toy.data, toy.grid, toy.params, SamplerKind::tc, MoveRadii{});
  LeafStats stats = probe.leaf_stats(probe.tree().root());
  ModelParams flat = toy.params;
  flat.loc = LocationPrior{0, 9};
  LeafContext ctx = LeafContext::make(stats, flat, 0);
  CHECK(joint_weight(ctx, 10, 0) == kNegInf);
  Rng rng = make_rng(47);
  for (int i = 0; i < 300; ++i) {
    // slice centered at 10 with radius 2: only {8, 9} carry prior mass
    JointDraw draw = joint_slice_draw(rng, ctx, 10, 0, 2, 1);
    CHECK(draw.lambda >= 8);
    CHECK(draw.lambda <= 9);
  }
}

TEST_CASE("single-leaf parameter updates hit the enumerated posterior") {
  // a fixed root-only tree: the (lambda, k) Gibbs pair should converge to the
  // exactly enumerable conditional posterior
  Dataset data;
  for (long yv : {3, 3, 4, 5, 3, 4}) {
    data.x.push_back({static_cast<double>(yv)});
    data.y.push_back(yv);
  }
  data.x[0][0] = 0.0;  // give the grid a range
  ModelParams mp;
  mp.t = 0.025;
  mp.loc = LocationPrior{0, 6};
  mp.scale = ScalePrior{1, 0.0, 0.0};  // finite raw-scale support
  mp.tree_prior = TreePrior{0.5, 2.0};
  auto grid = CutpointGrid::make(data.x, 2);

  MoveRadii radii;
  radii.m_lambda = 2;
  radii.m_k = 1;
  TreeSampler sampler(data, grid, mp, SamplerKind::tc, radii);
  Rng rng = make_rng(53);

  std::map<long, long> lambda_counts;
  const long iters = 200000;
  for (long i = 0; i < iters; ++i) {
    sampler.update_leaf_params(rng);
    ++lambda_counts[sampler.tree().node(sampler.tree().root()).lambda];
  }

  LeafStats stats = sampler.leaf_stats(sampler.tree().root());
  LeafContext ctx = LeafContext::make(stats, mp, 0);
  std::map<long, double> post;
  std::vector<double> all;
  for (long lambda = 0; lambda <= 6; ++lambda) {
    for (long k = -3; k <= 5; ++k) {
      double w = joint_weight(ctx, lambda, k);
      if (w != kNegInf) all.push_back(w);
    }
  }
  double z = log_sum_exp(all);
  for (long lambda = 0; lambda <= 6; ++lambda) {
    std::vector<double> ws;
    for (long k = -3; k <= 5; ++k) {
      double w = joint_weight(ctx, lambda, k);
      if (w != kNegInf) ws.push_back(w);
    }
    if (!ws.empty()) post[lambda] = std::exp(log_sum_exp(ws) - z);
  }
  double tv = 0.0;
  for (long lambda = 0; lambda <= 6; ++lambda) {
    double hat = lambda_counts.count(lambda)
                     ? static_cast<double>(lambda_counts[lambda]) / static_cast<double>(iters)
                     : 0.0;
    tv += std::fabs(hat - (post.count(lambda) ? post[lambda] : 0.0));
  }
  CHECK(tv / 2.0 < 0.02);
}

TEST_CASE("constant data concentrates the location at the shared value") {
  Dataset data;
  for (int i = 0; i < 8; ++i) {
    data.x.push_back({static_cast<double>(i)});
    data.y.push_back(4);
  }
  ModelParams mp;
  mp.t = 0.025;
  mp.loc = LocationPrior{0, 8};
  mp.scale = ScalePrior{0, 0.0, 0.0};
  mp.tree_prior = TreePrior{0.5, 2.0};
  auto grid = CutpointGrid::make(data.x, 2);
  MoveRadii radii;
  radii.m_lambda = 2;
  radii.m_k = 1;
  TreeSampler sampler(data, grid, mp, SamplerKind::tc, radii);
  Rng rng = make_rng(57);
  long at_mode = 0;
  const long iters = 20000;
  for (long i = 0; i < iters; ++i) {
    sampler.update_leaf_params(rng);
    if (sampler.tree().node(sampler.tree().root()).lambda == 4) ++at_mode;
  }
  CHECK(static_cast<double>(at_mode) / iters > 0.95);
}

TEST_CASE("MH and taxicab leaf updates share a stationary law") {
  Dataset data;
  for (long yv : {2, 3, 3, 4, 6, 3}) {
    data.x.push_back({static_cast<double>(yv)});
    data.y.push_back(yv);
  }
  data.x[0][0] = 0.0;
  ModelParams mp;
  mp.t = 0.025;
  mp.loc = LocationPrior{0, 8};
  mp.scale = ScalePrior{1, 0.5, 0.025};
  mp.tree_prior = TreePrior{0.5, 2.0};
  auto grid = CutpointGrid::make(data.x, 2);
  MoveRadii radii;
  radii.m_lambda = 2;
  radii.m_k = 1;
  radii.lambda = 2;
  radii.k = 1;

  auto run = [&](SamplerKind kind, std::uint64_t seed) {
    TreeSampler sampler(data, grid, mp, kind, radii);
    Rng rng = make_rng(seed);
    std::map<long, long> counts;
    const long iters = 300000;
    for (long i = 0; i < iters; ++i) {
      sampler.update_leaf_params(rng);
      ++counts[sampler.tree().node(sampler.tree().root()).lambda];
    }
    std::map<long, double> freq;
    for (const auto& [v, c] : counts)
      freq[v] = static_cast<double>(c) / static_cast<double>(iters);
    return freq;
  };
  auto tc = run(SamplerKind::tc, 59);
  auto mh = run(SamplerKind::mh, 61);
  CHECK(toy::tv_between(tc, mh) < 0.02);
}

TEST_CASE("toy tree posterior matches exhaustive enumeration") {
  auto toy = toy::make_toy(false);
  auto exact = toy::enumerate_posterior(toy);
  const char* env = std::getenv("TOY_ITERS");
  long iters = env ? std::atol(env) : 300000;
  auto chain = toy::run_toy_chain(toy, SamplerKind::tc, iters, 67);
  double tv_size = toy::tv_between(exact.size_probs, chain.size_freq);
  double tv_tree = toy::tv_between(exact.tree_probs, chain.tree_freq);
  INFO("size tv ", tv_size, " tree tv ", tv_tree);
  CHECK(tv_size < 0.05);
  CHECK(tv_tree < 0.06);
}

TEST_CASE("naive-MH moves target the same toy posterior") {
  auto toy = toy::make_toy(false);
  auto exact = toy::enumerate_posterior(toy);
  auto chain = toy::run_toy_chain(toy, SamplerKind::mh, 300000, 71);
  CHECK(toy::tv_between(exact.size_probs, chain.size_freq) < 0.05);
}

TEST_CASE("fixed seed reproduces the chain bit for bit") {
  auto toy = toy::make_toy(false);
  MoveRadii radii;
  radii.m_lambda = 2;
  radii.m_k = 1;
  radii.c = 1;
  auto run = [&]() {
    TreeSampler sampler(toy.data, toy.grid, toy.params, SamplerKind::tc, radii);
    Rng rng = make_rng(73);
    std::string trace;
    for (int i = 0; i < 2000; ++i) {
      sampler.step(rng);
      trace += sampler.topology_key();
      trace += ';';
      for (long g : sampler.fitted()) trace += std::to_string(g) + ",";
    }
    return trace;
  };
  CHECK(run() == run());
}

TEST_CASE("marginal enumeration size grows linearly in support and window") {
  auto toy = toy::make_toy(false);
  TreeSampler probe(toy.data, toy.grid, toy.params, SamplerKind::mh, MoveRadii{});
  LeafStats stats = probe.leaf_stats(probe.tree().root());
  LeafContext ctx = LeafContext::make(stats, toy.params, 0);
  long span = toy.params.loc.d2 - toy.params.loc.d1 + 1;
  CHECK(marginal_candidate_count(ctx, 3) == span * 7);
  CHECK(marginal_candidate_count(ctx, 6) == span * 13);
}

}  // TEST_SUITE
