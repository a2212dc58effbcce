#include <cmath>
#include <map>

#include "doctest.h"
#include "taxicab/numeric.hpp"
#include "taxicab/tent.hpp"
#include "taxicab/tree_model.hpp"
#include "toy_support.hpp"

using namespace taxicab;

namespace {

// independent quadrature oracle: Simpson integration of
// rho^n1 (1-rho)^(n-n1) Beta(rho; h1, h2) over (0, 1)
double beta_binom_quadrature(long n, long n1, double h1, double h2) {
  const int steps = 20000;  // even
  auto f = [&](double r) {
    if (r <= 0.0 || r >= 1.0) return 0.0;
    double logv = (static_cast<double>(n1) + h1 - 1.0) * std::log(r) +
                  (static_cast<double>(n - n1) + h2 - 1.0) * std::log1p(-r);
    return std::exp(logv);
  };
  double h = 1.0 / steps;
  double acc = f(0.0) + f(1.0);
  for (int i = 1; i < steps; ++i) acc += f(i * h) * ((i % 2) ? 4.0 : 2.0);
  double integral = acc * h / 3.0;
  double log_beta_const = std::lgamma(h1 + h2) - std::lgamma(h1) - std::lgamma(h2);
  return std::exp(log_beta_const) * integral;
}

ModelParams zi_params() {
  ModelParams mp;
  mp.t = 0.025;
  mp.loc = LocationPrior{0, 6};
  mp.scale = ScalePrior{1, 0.0, 0.025};
  mp.tree_prior = TreePrior{0.5, 1.0};
  mp.zi = true;
  mp.h1 = 1.0;
  mp.h2 = 1.0;
  return mp;
}

}  // namespace

TEST_SUITE("zi") {

TEST_CASE("rho-marginal factor closed form") {
  // Gamma(2)^3 / (Gamma(1)^2 Gamma(4)) = 1/6
  CHECK(zi_rho_marginal_log(2, 1, 1.0, 1.0) == doctest::Approx(std::log(1.0 / 6.0)).epsilon(1e-12));
  CHECK(zi_rho_marginal_log(0, 0, 1.0, 1.0) == doctest::Approx(0.0));
  CHECK(zi_rho_marginal_log(0, 0, 2.5, 0.7) == doctest::Approx(0.0));
  LeafStats one;
  one.n = 2;
  one.n1 = 1;
  one.hist.emplace_back(0, 1);
  double q = tent_log_pmf(0, TentParams{0, 2, 0.025});
  CHECK(zi_rho_marginal_leaf_lik(one, 0, 1, 1.0, 1.0, 0.025) ==
        doctest::Approx(std::log(1.0 / 6.0) + q).epsilon(1e-12));
}

TEST_CASE("rho-marginal factor matches quadrature on random cases") {
  Rng rng = make_rng(79);
  for (int rep = 0; rep < 40; ++rep) {
    long n = uniform_int(rng, 0, 12);
    long n1 = uniform_int(rng, 0, n);
    double h1 = 0.5 + 3.0 * uniform_real(rng);
    double h2 = 0.5 + 3.0 * uniform_real(rng);
    double exact = std::exp(zi_rho_marginal_log(n, n1, h1, h2));
    double quad = beta_binom_quadrature(n, n1, h1, h2);
    CHECK(exact == doctest::Approx(quad).epsilon(1e-6));
  }
}

TEST_CASE("latent indicator updates obey the mixture conditionals") {
  Dataset data;
  data.x.push_back({0.0});
  data.y.push_back(0);
  data.x.push_back({1.0});
  data.y.push_back(3);
  auto grid = CutpointGrid::make(data.x, 1);
  ModelParams mp = zi_params();
  TreeSampler sampler(data, grid, mp, SamplerKind::tc, MoveRadii{2, 1, 2, 1, 1});
  Rng rng = make_rng(83);

  Tree& tree = sampler.tree_for_tests();
  TreeNode& root = tree.node(tree.root());
  root.lambda = 0;
  root.k = 1;  // effective scale 2, so p_t(0) = 0.316667
  root.rho = 0.5;
  long ones = 0;
  const int reps = 200000;
  for (int i = 0; i < reps; ++i) {
    sampler.update_z(rng);
    CHECK(sampler.z()[1] == 0);  // positive response forces z = 0
    ones += sampler.z()[0];
  }
  double expect = 0.5 / (0.5 + 0.5 * 0.95 * 3.0 / 9.0);
  CHECK(expect == doctest::Approx(0.759494).epsilon(1e-5));
  CHECK(static_cast<double>(ones) / reps == doctest::Approx(expect).epsilon(0.01));

  root.rho = 0.0;  // zero inflation off: z stays 0
  for (int i = 0; i < 100; ++i) {
    sampler.update_z(rng);
    CHECK(sampler.z()[0] == 0);
  }
}

TEST_CASE("leaf zero-probability Gibbs draw follows the conjugate posterior") {
  // three structural zeros (forced: the tent places no mass at zero) and
  // seven positives: rho | z ~ Beta(1+3, 1+7)
  Dataset data;
  for (int i = 0; i < 3; ++i) {
    data.x.push_back({static_cast<double>(i)});
    data.y.push_back(0);
  }
  for (int i = 0; i < 7; ++i) {
    data.x.push_back({static_cast<double>(3 + i)});
    data.y.push_back(5);
  }
  auto grid = CutpointGrid::make(data.x, 1);
  ModelParams mp = zi_params();
  mp.t = 0.0;
  TreeSampler sampler(data, grid, mp, SamplerKind::tc, MoveRadii{2, 1, 2, 1, 1});
  Rng rng = make_rng(89);
  Tree& tree = sampler.tree_for_tests();
  TreeNode& root = tree.node(tree.root());
  root.lambda = 5;
  root.k = -1;  // effective scale 0: the tent cannot produce zeros
  root.rho = 0.5;

  double mean = 0.0, sq = 0.0;
  const int reps = 200000;
  for (int i = 0; i < reps; ++i) {
    sampler.update_z(rng);
    sampler.update_rho(rng);
    double r = tree.node(tree.root()).rho;
    mean += r;
    sq += r * r;
  }
  mean /= reps;
  sq = sq / reps - mean * mean;
  CHECK(mean == doctest::Approx(4.0 / 12.0).epsilon(0.01));
  CHECK(sq == doctest::Approx(4.0 * 8.0 / (144.0 * 13.0)).epsilon(0.05));
}

TEST_CASE("zero-inflated toy posterior matches enumeration with latents integrated") {
  auto toy = toy::make_toy(true);
  auto exact = toy::enumerate_posterior(toy);
  auto chain = toy::run_toy_chain(toy, SamplerKind::tc, 400000, 97);
  double tv_tree = toy::tv_between(exact.tree_probs, chain.tree_freq);
  INFO("zi tree tv ", tv_tree);
  CHECK(tv_tree < 0.03);
}

TEST_CASE("zero-inflated naive-MH chain agrees too") {
  auto toy = toy::make_toy(true);
  auto exact = toy::enumerate_posterior(toy);
  auto chain = toy::run_toy_chain(toy, SamplerKind::mh, 300000, 101);
  CHECK(toy::tv_between(exact.tree_probs, chain.tree_freq) < 0.03);
}

}  // TEST_SUITE
