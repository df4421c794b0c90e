#include "torusperc/stats.hpp"

#include <cmath>
#include <cstdio>

#include "torusperc/digest.hpp"
#include "torusperc/errors.hpp"

namespace torusperc {

std::string hex_digest(std::uint64_t v) {
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(v));
  return std::string(buf);
}

BoundCheck make_bound_check(std::string name, double lhs, double rhs, double se, int multiplier) {
  BoundCheck c;
  c.name = std::move(name);
  c.lhs = lhs;
  c.rhs = rhs;
  c.slack = rhs - lhs;
  c.se = se;
  c.multiplier = multiplier;
  c.pass = lhs <= rhs + multiplier * se;
  return c;
}

double pairwise_sum(const double* data, std::size_t n) {
  if (n <= 8) {
    double s = 0.0;
    for (std::size_t i = 0; i < n; ++i) s += data[i];
    return s;
  }
  std::size_t half = n / 2;
  return pairwise_sum(data, half) + pairwise_sum(data + half, n - half);
}

double pairwise_sum(const std::vector<double>& v) { return pairwise_sum(v.data(), v.size()); }

MeanSe mean_with_se(const std::vector<double>& v) {
  MeanSe r;
  r.n = v.size();
  if (v.empty()) return r;
  r.value = pairwise_sum(v) / v.size();
  if (v.size() < 2) return r;
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double d = v[i] - r.value;
    sq[i] = d * d;
  }
  double var = pairwise_sum(sq) / (v.size() - 1);
  r.se = std::sqrt(var / v.size());
  return r;
}

MeanSe binomial_estimate(std::size_t successes, std::size_t n) {
  if (n == 0) throw Error("stats-empty", "binomial estimate needs n > 0");
  MeanSe r;
  r.n = n;
  r.value = static_cast<double>(successes) / n;
  r.se = std::sqrt(r.value * (1.0 - r.value) / n);
  return r;
}

double sample_variance(const std::vector<double>& v) {
  if (v.size() < 2) throw Error("stats-empty", "variance needs at least 2 samples");
  double mean = pairwise_sum(v) / v.size();
  std::vector<double> sq(v.size());
  for (std::size_t i = 0; i < v.size(); ++i) {
    double d = v[i] - mean;
    sq[i] = d * d;
  }
  return pairwise_sum(sq) / (v.size() - 1);
}

MeanSe variance_with_jackknife_se(const std::vector<double>& v) {
  std::size_t n = v.size();
  if (n < 3) throw Error("stats-empty", "jackknife variance needs at least 3 samples");
  double s1 = pairwise_sum(v);
  std::vector<double> sq(n);
  for (std::size_t i = 0; i < n; ++i) sq[i] = v[i] * v[i];
  double s2 = pairwise_sum(sq);

  // leave-one-out variances in closed form
  std::vector<double> loo(n);
  double m = static_cast<double>(n - 1);
  for (std::size_t i = 0; i < n; ++i) {
    double s1i = s1 - v[i];
    double s2i = s2 - v[i] * v[i];
    loo[i] = (s2i - s1i * s1i / m) / (m - 1.0);
  }
  double loo_mean = pairwise_sum(loo) / n;
  std::vector<double> dev(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = loo[i] - loo_mean;
    dev[i] = d * d;
  }
  MeanSe r;
  r.n = n;
  r.value = (s2 - s1 * s1 / n) / (n - 1);
  r.se = std::sqrt((m / n) * pairwise_sum(dev));
  return r;
}

double jarque_bera(const std::vector<double>& v) {
  std::size_t n = v.size();
  if (n < 8) throw Error("stats-empty", "normality check needs at least 8 samples");
  double mean = pairwise_sum(v) / n;
  std::vector<double> p2(n), p3(n), p4(n);
  for (std::size_t i = 0; i < n; ++i) {
    double d = v[i] - mean;
    p2[i] = d * d;
    p3[i] = d * d * d;
    p4[i] = d * d * d * d;
  }
  double m2 = pairwise_sum(p2) / n;
  double m3 = pairwise_sum(p3) / n;
  double m4 = pairwise_sum(p4) / n;
  double skew = m3 / std::pow(m2, 1.5);
  double exkurt = m4 / (m2 * m2) - 3.0;
  return n * (skew * skew / 6.0 + exkurt * exkurt / 24.0);
}

double jarque_bera_pvalue(double stat) { return std::exp(-stat / 2.0); }

ChebyshevBound chebyshev_tail_bound(double variance, double p_le_zero, double level) {
  if (!(variance >= 0.0) || !(p_le_zero > 0.0) || !(level > 0.0))
    throw Error("stats-domain", "tail bound needs variance >= 0, P[X<=0] > 0, level > 0");
  ChebyshevBound b;
  double a = std::sqrt(variance);
  double t = std::sqrt(p_le_zero);
  b.level_floor = 2.0 * a / t;
  b.applicable = level > b.level_floor;
  double raw = 4.0 * variance / (level * level);
  b.bound = raw < 1.0 ? raw : 1.0;
  return b;
}

double chi2_quantile(double p, double dof) {
  if (!(p > 0.0 && p < 1.0) || !(dof > 0.0))
    throw Error("stats-domain", "chi2 quantile needs p in (0,1), dof > 0");
  // inverse normal via Acklam's rational approximation
  auto norm_inv = [](double q) {
    static const double a[] = {-3.969683028665376e+01, 2.209460984245205e+02,
                               -2.759285104469687e+02, 1.383577518672690e+02,
                               -3.066479806614716e+01, 2.506628277459239e+00};
    static const double b[] = {-5.447609879822406e+01, 1.615858368580409e+02,
                               -1.556989798598866e+02, 6.680131188771972e+01,
                               -1.328068155288572e+01};
    static const double c[] = {-7.784894002430293e-03, -3.223964580411365e-01,
                               -2.400758277161838e+00, -2.549732539343734e+00,
                               4.374664141464968e+00,  2.938163982698783e+00};
    static const double d[] = {7.784695709041462e-03, 3.224671290700398e-01,
                               2.445134137142996e+00, 3.754408661907416e+00};
    double plow = 0.02425;
    if (q < plow) {
      double u = std::sqrt(-2.0 * std::log(q));
      return (((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
             ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    }
    if (q > 1.0 - plow) {
      double u = std::sqrt(-2.0 * std::log(1.0 - q));
      return -(((((c[0] * u + c[1]) * u + c[2]) * u + c[3]) * u + c[4]) * u + c[5]) /
             ((((d[0] * u + d[1]) * u + d[2]) * u + d[3]) * u + 1.0);
    }
    double u = q - 0.5, t = u * u;
    return (((((a[0] * t + a[1]) * t + a[2]) * t + a[3]) * t + a[4]) * t + a[5]) * u /
           (((((b[0] * t + b[1]) * t + b[2]) * t + b[3]) * t + b[4]) * t + 1.0);
  };
  double z = norm_inv(p);
  double f = 2.0 / (9.0 * dof);
  double w = 1.0 - f + z * std::sqrt(f);
  return dof * w * w * w;
}

}  // namespace torusperc
