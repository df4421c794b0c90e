#include "torusperc/kernel.hpp"

#include <Eigen/Dense>

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "torusperc/digest.hpp"
#include "torusperc/errors.hpp"
#include "torusperc/fft.hpp"
#include "torusperc/stats.hpp"

#include <nlohmann/json.hpp>

namespace torusperc {

namespace {

// Quintic taper from 1 at 0.75*r_cut down to 0 at r_cut, so the sampled
// kernel has hard support of radius r_cut while staying C^2.
double cutoff(double r, double r_cut) {
  double a = 0.75 * r_cut;
  if (r <= a) return 1.0;
  if (r >= r_cut) return 0.0;
  double s = (r - a) / (r_cut - a);
  return 1.0 - s * s * s * (10.0 - 15.0 * s + 6.0 * s * s);
}

double eval_raw(const KernelSpec& spec, const std::array<double, 3>& x, int d) {
  double r2 = 0.0;
  for (int k = 0; k < d; ++k) r2 += x[k] * x[k];
  switch (spec.family) {
    case KernelFamily::bargmann_fock:
      return std::exp(-r2 / (spec.width * spec.width));
    case KernelFamily::oscillatory:
      return (1.0 - spec.osc_a * r2) * std::exp(-r2);
    case KernelFamily::truncated_polynomial_decay:
      return std::pow(1.0 + r2, -0.5 * spec.beta);
    case KernelFamily::custom_table:
      return spec.analytic(x);
    case KernelFamily::constant:
      return spec.constant_value;
  }
  throw Error("kernel-invalid", "unhandled family");
}

// Effective support radius used to bound the periodization sum. Families with
// Gaussian envelope underflow to zero past ~27 widths.
double support_radius(const KernelSpec& spec) {
  if (spec.r_cut > 0.0) return spec.r_cut;
  switch (spec.family) {
    case KernelFamily::bargmann_fock:
      return 28.0 * spec.width;
    case KernelFamily::oscillatory:
      return 29.0;
    default:
      throw Error("kernel-invalid", "truncation radius required for this family");
  }
}

void validate_spec(const KernelSpec& spec, const TorusGrid& grid) {
  auto finite = [](double v) { return std::isfinite(v); };
  if (!finite(spec.width) || !finite(spec.osc_a) || !finite(spec.beta) || !finite(spec.r_cut) ||
      !finite(spec.constant_value))
    throw Error("kernel-invalid", "non-finite parameter");
  if (spec.r_cut < 0.0) throw Error("kernel-invalid", "truncation radius must be positive");
  switch (spec.family) {
    case KernelFamily::bargmann_fock:
      if (spec.width <= 0.0) throw Error("kernel-invalid", "width must be positive");
      break;
    case KernelFamily::truncated_polynomial_decay:
      if (spec.beta <= 2.0) throw Error("kernel-invalid", "decay exponent must exceed 2");
      if (spec.r_cut <= 0.0)
        throw Error("kernel-invalid", "truncation radius required for polynomial decay");
      break;
    case KernelFamily::custom_table:
      if (spec.table.empty() && !spec.analytic)
        throw Error("kernel-invalid", "custom kernel needs a table or an evaluator");
      if (!spec.table.empty() && spec.table.size() != grid.cell_count())
        throw Error("grid-mismatch", "custom table length does not match grid");
      if (spec.table.empty() && spec.r_cut <= 0.0)
        throw Error("kernel-invalid", "analytic custom kernel needs a truncation radius");
      break;
    default:
      break;
  }
}

// Cells that must span the characteristic width for the lattice to resolve
// the kernel shape. Constant and tabulated kernels have no intrinsic scale.
void check_resolution(const KernelSpec& spec, const TorusGrid& grid) {
  double char_width = 0.0;
  switch (spec.family) {
    case KernelFamily::bargmann_fock:
      char_width = 2.0 * spec.width;
      break;
    case KernelFamily::oscillatory:
    case KernelFamily::truncated_polynomial_decay:
      char_width = 2.0;
      break;
    default:
      return;
  }
  double cells_across = char_width / grid.spacing();
  if (cells_across < 8.0) {
    char buf[160];
    std::snprintf(buf, sizeof buf, "%.3g cells across width %.3g, need at least 8", cells_across,
                  char_width);
    throw Error("kernel-underresolved", buf);
  }
}

std::vector<double> sample_values(const KernelSpec& spec, const TorusGrid& grid) {
  if (spec.family == KernelFamily::custom_table && !spec.table.empty()) return spec.table;
  std::size_t count = grid.cell_count();
  std::vector<double> values(count);
  if (spec.family == KernelFamily::constant) {
    std::fill(values.begin(), values.end(), spec.constant_value);
    return values;
  }
  double r_eff = support_radius(spec);
  double r_eff2 = r_eff * r_eff;
  int replicas = static_cast<int>(std::floor((r_eff + 0.5 * grid.side) / grid.side + 1e-12));
  std::array<int, 3> m{0, 0, 0};
  for (std::size_t i = 0; i < count; ++i) {
    auto c = grid.coords(i);
    std::array<double, 3> base{0.0, 0.0, 0.0};
    for (int k = 0; k < grid.d; ++k) base[k] = grid.centered(grid.point(c[k]));
    double acc = 0.0;
    m[2] = 0;
    int m2_lo = grid.d == 3 ? -replicas : 0;
    int m2_hi = grid.d == 3 ? replicas : 0;
    for (m[0] = -replicas; m[0] <= replicas; ++m[0]) {
      for (m[1] = -replicas; m[1] <= replicas; ++m[1]) {
        for (m[2] = m2_lo; m[2] <= m2_hi; ++m[2]) {
          std::array<double, 3> x = base;
          double r2 = 0.0;
          for (int k = 0; k < grid.d; ++k) {
            x[k] += m[k] * grid.side;
            r2 += x[k] * x[k];
          }
          if (r2 > r_eff2) continue;
          double v = eval_raw(spec, x, grid.d);
          if (spec.r_cut > 0.0) v *= cutoff(std::sqrt(r2), spec.r_cut);
          acc += v;
        }
      }
    }
    values[i] = acc;
  }
  return values;
}

void compute_functionals(Kernel& k) {
  const TorusGrid& grid = k.grid;
  double cv = grid.cell_volume();
  std::size_t count = grid.cell_count();
  std::vector<double> absv(count), sqv(count);
  for (std::size_t i = 0; i < count; ++i) {
    absv[i] = std::fabs(k.values[i]);
    sqv[i] = k.values[i] * k.values[i];
  }
  k.l1_norm = cv * pairwise_sum(absv);
  k.l2_norm = std::sqrt(cv * pairwise_sum(sqv));
  k.kappa = circular_convolve(grid, k.values, k.values);
  for (auto& v : k.kappa) v *= cv;
  k.sigma = std::sqrt(k.kappa[0]);
}

std::string kernel_digest(const Kernel& k) {
  Digest d;
  d.str("kernel").u64(static_cast<std::uint64_t>(k.spec.family)).u64(k.grid.d).u64(k.grid.n);
  d.f64(k.grid.side).f64s(k.values);
  return hex_digest(d.value());
}

}  // namespace

Kernel make_kernel(const KernelSpec& spec, const TorusGrid& grid) {
  validate_spec(spec, grid);
  check_resolution(spec, grid);
  Kernel k;
  k.spec = spec;
  k.grid = grid;
  k.values = sample_values(spec, grid);
  double peak = 0.0;
  for (double v : k.values) peak = std::max(peak, std::fabs(v));
  if (peak == 0.0) throw Error("zero-kernel", "sampled kernel vanishes identically");
  compute_functionals(k);
  if (spec.normalize_sigma) {
    if (!(k.sigma > 0.0))
      throw Error("kernel-invalid", "sigma normalization needs kappa(0) > 0");
    double scale = 1.0 / k.sigma;
    for (auto& v : k.values) v *= scale;
    compute_functionals(k);
    // forced by the rescale; the recomputed value differs only by round-off
    k.sigma = 1.0;
  }
  k.alpha = alpha(k);
  k.id = kernel_digest(k);
  return k;
}

double alpha(const Kernel& k) {
  if (!(k.l1_norm > 0.0)) throw Error("zero-kernel", "alpha needs a nonzero kernel");
  double volume = std::pow(k.grid.side, k.grid.d);
  double ratio = (k.l2_norm / k.l1_norm) * std::sqrt(volume);
  return 1.0 / std::sqrt(1.0 + std::fabs(std::log(ratio)));
}

namespace {

double symmetry_residual(const Kernel& k) {
  const TorusGrid& g = k.grid;
  std::size_t count = g.cell_count();
  int n = g.n;
  auto at = [&](std::array<int, 3> c) { return k.values[g.index(c)]; };
  double worst = 0.0;
  for (std::size_t i = 0; i < count; ++i) {
    auto c = g.coords(i);
    double v = k.values[i];
    // reflection along axis 0
    {
      auto t = c;
      t[0] = (n - t[0]) % n;
      worst = std::max(worst, std::fabs(at(t) - v));
    }
    // quarter rotation in each coordinate plane: (p,q) -> (-q, p)
    for (int p = 0; p < g.d; ++p) {
      for (int q = p + 1; q < g.d; ++q) {
        auto t = c;
        t[p] = (n - c[q]) % n;
        t[q] = c[p];
        worst = std::max(worst, std::fabs(at(t) - v));
      }
    }
  }
  return worst;
}

struct DecayFit {
  bool ok = false;
  double beta = 0.0;
};

DecayFit decay_fit(const Kernel& k) {
  const TorusGrid& g = k.grid;
  double lo = g.side / 4.0;
  double hi = g.side / 2.0;
  std::vector<double> lx, ly;
  for (std::size_t i = 0; i < g.cell_count(); ++i) {
    auto c = g.coords(i);
    double r2 = 0.0;
    for (int a = 0; a < g.d; ++a) {
      double x = g.centered(g.point(c[a]));
      r2 += x * x;
    }
    double r = std::sqrt(r2);
    if (r < lo || r > hi) continue;
    double q = std::fabs(k.values[i]);
    if (q <= 1e-300) continue;
    lx.push_back(std::log(r));
    ly.push_back(std::log(q));
  }
  DecayFit f;
  if (lx.size() < 2) return f;
  double mx = pairwise_sum(lx) / lx.size();
  double my = pairwise_sum(ly) / ly.size();
  std::vector<double> num(lx.size()), den(lx.size());
  for (std::size_t i = 0; i < lx.size(); ++i) {
    num[i] = (lx[i] - mx) * (ly[i] - my);
    den[i] = (lx[i] - mx) * (lx[i] - mx);
  }
  double d = pairwise_sum(den);
  if (d <= 0.0) return f;
  f.ok = true;
  f.beta = -pairwise_sum(num) / d;
  return f;
}

double covariance_min_eigenvalue(const Kernel& k) {
  const TorusGrid& g = k.grid;
  int d = g.d;
  double h = g.spacing();
  auto kap = [&](std::array<int, 3> off) {
    std::array<int, 3> c{0, 0, 0};
    for (int a = 0; a < d; ++a) c[a] = g.wrap(off[a]);
    return k.kappa[g.index(c)];
  };
  if (g.n < 4) {
    return k.kappa[0];
  }
  int m = d + 1;
  Eigen::MatrixXd cov(m, m);
  cov(0, 0) = kap({0, 0, 0});
  for (int a = 0; a < d; ++a) {
    std::array<int, 3> plus{0, 0, 0}, minus{0, 0, 0};
    plus[a] = 1;
    minus[a] = -1;
    double grad = (kap(plus) - kap(minus)) / (2.0 * h);
    cov(0, a + 1) = grad;
    cov(a + 1, 0) = grad;
    cov(a + 1, a + 1) = -(kap(plus) - 2.0 * kap({0, 0, 0}) + kap(minus)) / (h * h);
  }
  for (int a = 0; a < d; ++a) {
    for (int b = a + 1; b < d; ++b) {
      std::array<int, 3> pp{0, 0, 0}, pm{0, 0, 0}, mp{0, 0, 0}, mm{0, 0, 0};
      pp[a] = 1;
      pp[b] = 1;
      pm[a] = 1;
      pm[b] = -1;
      mp[a] = -1;
      mp[b] = 1;
      mm[a] = -1;
      mm[b] = -1;
      double mixed = -(kap(pp) - kap(pm) - kap(mp) + kap(mm)) / (4.0 * h * h);
      cov(a + 1, b + 1) = mixed;
      cov(b + 1, a + 1) = mixed;
    }
  }
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> solver(cov);
  return solver.eigenvalues().minCoeff();
}

}  // namespace

ConditionReport validate_conditions(const Kernel& k, const ConditionTolerances& tol) {
  ConditionReport r;
  r.tolerances = tol;
  r.sigma = k.sigma;
  // kappa(0) can be negative for asymmetric kernels; the magnitude keeps the
  // relative tolerances meaningful where sigma itself is undefined
  double s2 = std::fabs(k.kappa[0]);

  double min_kappa = k.kappa[0];
  for (double v : k.kappa) min_kappa = std::min(min_kappa, v);
  r.weak_positivity.min_kappa = min_kappa;
  r.weak_positivity.pass = min_kappa >= -tol.weak_positivity_rel * s2;

  double min_q = k.values[0];
  double peak = 0.0;
  for (double v : k.values) {
    min_q = std::min(min_q, v);
    peak = std::max(peak, std::fabs(v));
  }
  r.strong_positivity.min_q = min_q;
  r.strong_positivity.pass = min_q >= -tol.strong_positivity_rel * peak;

  r.symmetry.max_asymmetry = symmetry_residual(k);
  r.symmetry.pass = r.symmetry.max_asymmetry <= tol.symmetry_rel * peak;

  DecayFit fit = decay_fit(k);
  r.decay.fitted_beta = fit.beta;
  r.decay.pass = fit.ok && fit.beta > tol.decay_min_beta;

  r.nondegeneracy.min_eigenvalue = covariance_min_eigenvalue(k);
  r.nondegeneracy.pass = r.nondegeneracy.min_eigenvalue >= tol.nondegeneracy_rel * s2;
  return r;
}

KernelSpec kernel_preset(const std::string& name) {
  KernelSpec spec;
  if (name == "bargmann_fock") {
    return spec;
  }
  if (name == "oscillatory") {
    spec.family = KernelFamily::oscillatory;
    spec.osc_a = 0.05;
    return spec;
  }
  if (name == "truncated_polynomial_decay") {
    spec.family = KernelFamily::truncated_polynomial_decay;
    spec.beta = 4.0;
    spec.r_cut = 4.0;
    return spec;
  }
  if (name == "constant") {
    spec.family = KernelFamily::constant;
    spec.normalize_sigma = false;
    return spec;
  }
  if (name == "odd_gaussian") {
    spec.family = KernelFamily::custom_table;
    spec.r_cut = 8.0;
    // kappa(0) is negative for an odd kernel, so sigma is undefined and
    // normalization must stay off for the condition report to be reachable
    spec.normalize_sigma = false;
    spec.analytic = [](const std::array<double, 3>& x) {
      double r2 = x[0] * x[0] + x[1] * x[1] + x[2] * x[2];
      return x[0] * std::exp(-r2);
    };
    return spec;
  }
  throw Error("kernel-invalid", "unknown preset: " + name);
}

std::string condition_report_json(const ConditionReport& r) {
  nlohmann::json j;
  j["weak_positivity_pass"] = r.weak_positivity.pass;
  j["weak_positivity_min_kappa"] = r.weak_positivity.min_kappa;
  j["strong_positivity_pass"] = r.strong_positivity.pass;
  j["strong_positivity_min_q"] = r.strong_positivity.min_q;
  j["symmetry_pass"] = r.symmetry.pass;
  j["symmetry_max_asymmetry"] = r.symmetry.max_asymmetry;
  j["decay_pass"] = r.decay.pass;
  j["decay_fitted_beta"] = r.decay.fitted_beta;
  j["nondegeneracy_pass"] = r.nondegeneracy.pass;
  j["nondegeneracy_min_eigenvalue"] = r.nondegeneracy.min_eigenvalue;
  j["sigma"] = r.sigma;
  j["tol_weak_positivity_rel"] = r.tolerances.weak_positivity_rel;
  j["tol_strong_positivity_rel"] = r.tolerances.strong_positivity_rel;
  j["tol_symmetry_rel"] = r.tolerances.symmetry_rel;
  j["tol_decay_min_beta"] = r.tolerances.decay_min_beta;
  j["tol_nondegeneracy_rel"] = r.tolerances.nondegeneracy_rel;
  return j.dump();
}

}  // namespace torusperc
