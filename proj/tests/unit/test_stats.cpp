#include <doctest.h>

#include <cmath>
#include <random>
#include <vector>

#include "torusperc/errors.hpp"
#include "torusperc/stats.hpp"

using namespace torusperc;

TEST_CASE("pairwise sum matches naive summation and ignores chunking") {
  std::mt19937_64 gen(5);
  std::uniform_real_distribution<double> u(-1.0, 1.0);
  std::vector<double> v(1013);
  long double naive = 0.0;
  for (double& x : v) {
    x = u(gen);
    naive += x;
  }
  CHECK(pairwise_sum(v) == doctest::Approx(static_cast<double>(naive)).epsilon(1e-13));
  CHECK(pairwise_sum(v.data(), v.size()) == pairwise_sum(v));
  CHECK(pairwise_sum(std::vector<double>{}) == 0.0);
  CHECK(pairwise_sum(std::vector<double>{3.5}) == 3.5);
}

TEST_CASE("mean and se on a known sample") {
  const std::vector<double> v{1.0, 2.0, 3.0, 4.0};
  const MeanSe m = mean_with_se(v);
  CHECK(m.value == doctest::Approx(2.5));
  // sd = sqrt(5/3), se = sd/2
  CHECK(m.se == doctest::Approx(std::sqrt(5.0 / 3.0) / 2.0));
  CHECK(m.n == 4);
  CHECK(sample_variance(v) == doctest::Approx(5.0 / 3.0));
}

TEST_CASE("binomial estimate") {
  const MeanSe p = binomial_estimate(30, 100);
  CHECK(p.value == doctest::Approx(0.3));
  CHECK(p.se == doctest::Approx(std::sqrt(0.3 * 0.7 / 100.0)));
  CHECK(binomial_estimate(0, 50).se == 0.0);
  CHECK(binomial_estimate(50, 50).value == 1.0);
}

TEST_CASE("jackknife variance se shrinks with sample size and brackets truth") {
  std::mt19937_64 gen(17);
  std::normal_distribution<double> nd(0.0, 2.0);
  std::vector<double> small(200), large(5000);
  for (double& x : small) x = nd(gen);
  for (double& x : large) x = nd(gen);
  const MeanSe vs = variance_with_jackknife_se(small);
  const MeanSe vl = variance_with_jackknife_se(large);
  CHECK(vs.value == doctest::Approx(sample_variance(small)));
  CHECK(std::fabs(vl.value - 4.0) < 4.0 * vl.se);
  CHECK(vl.se < vs.se);
}

TEST_CASE("bound check slack and verdicts") {
  BoundCheck c = make_bound_check("demo", 0.25, 0.3, 0.01, 3);
  CHECK(c.pass);
  CHECK(c.slack == doctest::Approx(0.05));
  CHECK(c.multiplier == 3);
  CHECK_FALSE(make_bound_check("fail", 0.5, 0.3, 0.01, 3).pass);
  // 0.30 <= 0.29 + 3*0.01 passes on the boundary
  CHECK(make_bound_check("edge", 0.30, 0.29, 0.01, 3).pass);
  // negative multiplier demands a strict gap
  CHECK_FALSE(make_bound_check("gap", 0.30, 0.31, 0.01, -3).pass);
  CHECK(make_bound_check("gap", 0.30, 0.35, 0.01, -3).pass);
}

TEST_CASE("tail bound arithmetic on a two-point mixture") {
  // X = 0 with probability 1/4, X = 2 otherwise: Var = 3/4... but the lemma
  // only consumes (variance, p_le_zero, level), so feed round numbers
  const ChebyshevBound cb = chebyshev_tail_bound(4.0, 0.25, 10.0);
  CHECK(cb.applicable);
  CHECK(cb.level_floor == doctest::Approx(8.0));  // 2a/t = 2*2/0.5
  CHECK(cb.bound == doctest::Approx(0.16));       // 4*4/100
  CHECK_FALSE(chebyshev_tail_bound(4.0, 0.25, 7.0).applicable);
  CHECK_THROWS_AS(chebyshev_tail_bound(4.0, 0.0, 100.0), Error);  // t = 0 has no floor
  CHECK_THROWS_AS(chebyshev_tail_bound(-1.0, 0.25, 1.0), Error);
  const ChebyshevBound tight = chebyshev_tail_bound(1.0, 1.0, 2.5);
  CHECK(tight.applicable);
  CHECK(tight.bound == doctest::Approx(4.0 / 6.25));
}

TEST_CASE("chi-square quantiles against reference values") {
  CHECK(chi2_quantile(0.95, 10) == doctest::Approx(18.307038053275146).epsilon(2e-3));
  CHECK(chi2_quantile(0.99, 2) == doctest::Approx(9.21034037197618).epsilon(5e-3));
  CHECK(chi2_quantile(0.005, 100) == doctest::Approx(67.32756330547916).epsilon(2e-3));
  CHECK(chi2_quantile(0.995, 100) == doctest::Approx(140.1694894423138).epsilon(2e-3));
  CHECK(chi2_quantile(0.005, 10000) == doctest::Approx(9639.479982193741).epsilon(5e-4));
  CHECK(chi2_quantile(0.995, 10000) == doctest::Approx(10368.033052761462).epsilon(5e-4));
}

TEST_CASE("jarque-bera flags a skewed sample") {
  std::mt19937_64 gen(3);
  std::exponential_distribution<double> ed(1.0);
  std::vector<double> v(2000);
  for (double& x : v) x = ed(gen);
  CHECK(jarque_bera(v) > 100.0);
  CHECK(jarque_bera_pvalue(jarque_bera(v)) < 1e-10);
}
