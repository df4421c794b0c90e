#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace torusperc {

struct MeanSe {
  double value = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

// One-sided slack check "lhs <= rhs + multiplier * se". Pre-registered
// multiplier (3 throughout the experiments); negative multipliers express
// strict gaps (lhs <= rhs - |m| * se).
struct BoundCheck {
  std::string name;
  double lhs = 0.0;
  double rhs = 0.0;
  double slack = 0.0;  // rhs - lhs
  double se = 0.0;
  int multiplier = 3;
  bool pass = false;
};

BoundCheck make_bound_check(std::string name, double lhs, double rhs, double se, int multiplier);

// Fixed-structure pairwise summation. The reduction tree depends only on the
// element count, so sums over sample-indexed slots are identical for any
// thread count.
double pairwise_sum(const double* data, std::size_t n);
double pairwise_sum(const std::vector<double>& v);

MeanSe mean_with_se(const std::vector<double>& v);
MeanSe binomial_estimate(std::size_t successes, std::size_t n);
double sample_variance(const std::vector<double>& v);  // ddof 1

// Variance of the sample with a leave-one-out jackknife standard error.
MeanSe variance_with_jackknife_se(const std::vector<double>& v);

// Jarque-Bera normality statistic n*(skew^2/6 + exkurt^2/24); under normality
// asymptotically chi-square with 2 dof, so the p-value is exp(-stat/2).
double jarque_bera(const std::vector<double>& v);
double jarque_bera_pvalue(double stat);

// Tail bound for a random variable X with Var(X) = a^2 and P[X <= 0] = t^2:
// for levels l > 2a/t, P[X >= l] <= 4 a^2 / l^2. Inapplicable below the
// level floor.
struct ChebyshevBound {
  bool applicable = false;
  double level_floor = 0.0;  // 2a/t
  double bound = 0.0;        // 4 a^2 / l^2 (capped at 1)
};
ChebyshevBound chebyshev_tail_bound(double variance, double p_le_zero, double level);

// Wilson-Hilferty approximation to chi-square quantiles, accurate to ~1e-4
// relative at the dof counts used in tests.
double chi2_quantile(double p, double dof);

}  // namespace torusperc
