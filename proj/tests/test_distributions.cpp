#include <cmath>
#include <map>
#include <stdexcept>

#include "doctest.h"
#include "taxicab/multimodal.hpp"
#include "taxicab/numeric.hpp"
#include "taxicab/priors.hpp"
#include "taxicab/tent.hpp"

using namespace taxicab;

namespace {

// independent evaluation of the tent mass, straight from the piecewise form
double tent_mass_direct(long y, long lambda, long k_eff, double t) {
  long d = std::labs(y - lambda);
  double w = static_cast<double>(k_eff) + 1.0;
  if (d <= k_eff) return (1.0 - 2.0 * t) * (w - static_cast<double>(d)) / (w * w);
  if (t == 0.0) return 0.0;
  double ps = std::min(0.99, (1.0 - 2.0 * t) / (t * w * w));
  return t * ps * std::pow(1.0 - ps, static_cast<double>(d - k_eff - 1));
}

}  // namespace

TEST_SUITE("distributions") {

TEST_CASE("tent log pmf matches direct evaluation on frozen cases") {
  // body point: 0.95 * 3 / 9
  CHECK(tent_log_pmf(0, {0, 2, 0.025}) == doctest::Approx(std::log(0.95 * 3.0 / 9.0)).epsilon(1e-12));
  CHECK(std::exp(tent_log_pmf(0, {0, 2, 0.025})) == doctest::Approx(0.316667).epsilon(1e-5));
  // first tail point: p* caps at 0.99 here since 0.95 / (0.025 * 9) > 0.99
  CHECK(std::exp(tent_log_pmf(3, {0, 2, 0.025})) == doctest::Approx(0.02475).epsilon(1e-12));
  // zero tail mass outside the body
  CHECK(tent_log_pmf(5, {0, 2, 0.0}) == kNegInf);
  // randomized agreement with the direct form
  Rng rng = make_rng(7);
  for (int rep = 0; rep < 500; ++rep) {
    long lambda = uniform_int(rng, -30, 300);
    long k_eff = uniform_int(rng, 0, 25);
    double t = 0.001 + 0.4 * uniform_real(rng);
    long y = lambda + uniform_int(rng, -60, 60);
    double direct = tent_mass_direct(y, lambda, k_eff, t);
    CHECK(std::exp(tent_log_pmf(y, {lambda, k_eff, t})) == doctest::Approx(direct).epsilon(1e-12));
  }
}

TEST_CASE("tent parameter domain errors") {
  CHECK_THROWS_AS(tent_log_pmf(0, {0, 2, 0.5}), std::invalid_argument);
  CHECK_THROWS_AS(tent_log_pmf(0, {0, 2, -0.01}), std::invalid_argument);
  CHECK_THROWS_AS(tent_log_pmf(0, {0, -1, 0.1}), std::invalid_argument);
}

TEST_CASE("tent symmetry is exact") {
  for (long k_eff : {0L, 1L, 3L, 9L}) {
    for (double t : {0.0, 0.025, 0.3}) {
      TentParams p{17, k_eff, t};
      for (long d = 0; d <= 40; ++d) {
        CHECK(tent_log_pmf(17 + d, p) == tent_log_pmf(17 - d, p));
      }
    }
  }
}

TEST_CASE("tent body width and mass") {
  Rng rng = make_rng(11);
  for (int rep = 0; rep < 50; ++rep) {
    long k_eff = uniform_int(rng, 0, 40);
    double t = 0.001 + 0.48 * uniform_real(rng);
    TentParams p{uniform_int(rng, -5, 5), k_eff, t};
    double body = 0.0;
    long points = 0;
    for (long y = p.lambda - k_eff; y <= p.lambda + k_eff; ++y) {
      body += std::exp(tent_log_pmf(y, p));
      ++points;
    }
    CHECK(points == 2 * k_eff + 1);
    CHECK(body == doctest::Approx(1.0 - 2.0 * t).epsilon(1e-12));
  }
}

TEST_CASE("tent normalization over a wide truncation") {
  Rng rng = make_rng(13);
  for (int rep = 0; rep < 50; ++rep) {
    double t = 0.005 + 0.44 * uniform_real(rng);
    // keep the geometric rate above a floor so the truncated tail is negligible
    long k_cap = static_cast<long>(std::sqrt((1.0 - 2.0 * t) / (0.02 * t))) - 1;
    long k_eff = uniform_int(rng, 0, std::max<long>(0, std::min<long>(40, k_cap)));
    TentParams p{uniform_int(rng, -10, 200), k_eff, t};
    double total = 0.0;
    for (long y = p.lambda - k_eff - 2000; y <= p.lambda + k_eff + 2000; ++y)
      total += std::exp(tent_log_pmf(y, p));
    CHECK(std::fabs(total - 1.0) < 1e-12);
  }
}

TEST_CASE("tail edge identity when p* is uncapped") {
  // uncapped requires (1-2t)/(t(k+1)^2) < 0.99
  for (auto [k_eff, t] : std::vector<std::pair<long, double>>{{9, 0.3}, {5, 0.4}, {20, 0.1}}) {
    TentParams p{0, k_eff, t};
    double ps = p.p_star();
    REQUIRE(ps < 0.99);
    double w = static_cast<double>(k_eff) + 1.0;
    CHECK(t * ps == doctest::Approx((1.0 - 2.0 * t) / (w * w)).epsilon(1e-14));
  }
}

TEST_CASE("tent sampling: degenerate and translated modes") {
  Rng rng = make_rng(17);
  for (int i = 0; i < 200; ++i) CHECK(tent_sample(rng, {0, 0, 0.0}) == 0);
  for (int i = 0; i < 200; ++i) CHECK(tent_sample(rng, {7, 0, 0.0}) == 7);
}

TEST_CASE("tent sampling matches the pmf in total variation") {
  Rng rng = make_rng(19);
  TentParams p{0, 2, 0.025};
  std::map<long, long> counts;
  const long n = 1000000;
  for (long i = 0; i < n; ++i) ++counts[tent_sample(rng, p)];
  double tv = 0.0;
  long lo = counts.begin()->first - 5;
  long hi = counts.rbegin()->first + 5;
  for (long y = lo; y <= hi; ++y) {
    double hat = counts.count(y) ? static_cast<double>(counts[y]) / static_cast<double>(n) : 0.0;
    tv += std::fabs(hat - std::exp(tent_log_pmf(y, p)));
  }
  CHECK(tv / 2.0 < 0.005);
}

TEST_CASE("effective scale") {
  CHECK(effective_scale(2) == 7);
  CHECK(effective_scale(0) == 1);
  CHECK(effective_scale(-3) == 0);
  CHECK(effective_scale(-1) == 0);
  CHECK(effective_scale(5) == 148);
  CHECK_THROWS_AS(effective_scale(44), std::overflow_error);
  // floor(e^k) computed independently in long double
  for (long k = 0; k <= 30; ++k) {
    CHECK(effective_scale(k) == static_cast<long>(std::floor(std::exp(static_cast<long double>(k)))));
  }
}

TEST_CASE("nonneg log") {
  CHECK(nonneg_log(1) == 0.0);
  CHECK(nonneg_log(0) == 0.0);
  CHECK(nonneg_log(10) == doctest::Approx(2.302585092994046).epsilon(1e-14));
  CHECK_THROWS_AS(nonneg_log(-1), std::invalid_argument);
}

TEST_CASE("scale prior derived location and width") {
  ScalePrior sp{4, 1.0, 0.025};
  CHECK(sp.at(1, 1).lambda == 2);
  CHECK(sp.at(1, 1).k_eff == 0);
  ScalePrior sp0{0, 1.0, 0.025};
  CHECK(sp0.at(0, 0).lambda == 0);
  CHECK(sp0.at(0, 0).k_eff == 0);
  CHECK(sp.at(10, 0).lambda == 4);
  CHECK(sp.at(10, 0).k_eff == 2);  // floor(log 10 / 1)
  // the prior places mass on negative raw scales
  CHECK(sp.log_pmf(-7, 10, 0) > kNegInf);
}

TEST_CASE("location prior") {
  LocationPrior lp{0, 9};
  CHECK(lp.log_pmf(5) == doctest::Approx(std::log(0.1)).epsilon(1e-14));
  CHECK(lp.log_pmf(10) == kNegInf);
  LocationPrior degenerate{0, 0};
  CHECK(degenerate.log_pmf(0) == 0.0);
  CHECK_THROWS_AS((LocationPrior{3, 2}.validate()), std::invalid_argument);
}

TEST_CASE("multimodal target") {
  MultimodalTarget tgt;
  CHECK(multimodal_log_unnorm(0, tgt) ==
        doctest::Approx(std::log(0.0005) - 10.0).epsilon(1e-12));
  CHECK(multimodal_log_unnorm(-1, tgt) == kNegInf);

  // normalized mass at 21 against brute force, matching the reported bar value
  double z = 0.0;
  for (long s = 0; s <= 400; ++s) z += std::exp(multimodal_log_unnorm(s, tgt));
  double p21 = std::exp(multimodal_log_unnorm(21, tgt)) / z;
  CHECK(p21 == doctest::Approx(1.776e-3).epsilon(5e-4));

  // even states carry about 0.05% of the mass under w = 0.0005
  double even = 0.0;
  for (long s = 0; s <= 400; s += 2) even += std::exp(multimodal_log_unnorm(s, tgt));
  CHECK(even / z == doctest::Approx(5.0e-4).epsilon(1e-2));
}

}  // TEST_SUITE
