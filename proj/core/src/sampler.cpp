#include "torusperc/sampler.hpp"

#include <algorithm>
#include <cmath>

#include "torusperc/errors.hpp"
#include "torusperc/fft.hpp"
#include "torusperc/rng.hpp"
#include "torusperc/stats.hpp"

namespace torusperc {

WhiteNoiseEps draw_white_noise(const TorusGrid& grid, std::uint64_t seed) {
  WhiteNoiseEps w;
  w.grid = grid;
  w.seed = seed;
  double sd = std::sqrt(grid.cell_volume());
  w.coeffs.resize(grid.cell_count());
  for (std::size_t i = 0; i < w.coeffs.size(); ++i)
    w.coeffs[i] = sd * rng::normal(seed, rng::kWhiteNoise, 0, i);
  return w;
}

FieldSample convolve_field(const Kernel& k, const WhiteNoiseEps& w) {
  if (!k.grid.same_shape(w.grid)) throw Error("grid-mismatch", "kernel and noise grids differ");
  FieldSample f;
  f.grid = k.grid;
  f.kernel_id = k.id;
  f.seed = w.seed;
  f.values = circular_convolve(k.grid, k.values, w.coeffs);
  return f;
}

namespace {

FieldSample draw_spectral(const Kernel& k, std::uint64_t seed) {
  const TorusGrid& grid = k.grid;
  auto spectrum_c = fft_real(grid, k.kappa);
  std::vector<double> spectrum(spectrum_c.size());
  double s2 = std::fabs(k.kappa[0]);
  double floor = -1e-9 * s2;
  for (std::size_t i = 0; i < spectrum.size(); ++i) {
    double v = spectrum_c[i].real();
    if (v < floor) throw Error("spectrum-negative", "DFT of kappa below tolerance");
    spectrum[i] = v > 0.0 ? std::sqrt(v) : 0.0;
  }
  std::vector<double> xi(grid.cell_count());
  for (std::size_t i = 0; i < xi.size(); ++i) xi[i] = rng::normal(seed, rng::kSpectral, 0, i);
  auto xi_hat = fft_real(grid, xi);
  for (std::size_t i = 0; i < xi_hat.size(); ++i) xi_hat[i] *= spectrum[i];
  FieldSample f;
  f.grid = grid;
  f.kernel_id = k.id;
  f.seed = seed;
  f.values = ifft_real(grid, xi_hat);
  return f;
}

}  // namespace

FieldSample draw_field(const Kernel& k, std::uint64_t seed, SampleRoute route) {
  if (route == SampleRoute::spectral_oracle) return draw_spectral(k, seed);
  return convolve_field(k, draw_white_noise(k.grid, seed));
}

CovarianceEstimate estimate_covariance(const Kernel& k, std::size_t n_samples, std::uint64_t seed,
                                       const std::vector<std::array<int, 3>>& offsets,
                                       std::size_t anchor) {
  if (n_samples < 100) throw Error("config-invalid", "covariance estimate needs >= 100 samples");
  const TorusGrid& grid = k.grid;
  if (anchor >= grid.cell_count()) throw Error("grid-mismatch", "anchor outside grid");
  auto ac = grid.coords(anchor);
  std::vector<std::size_t> partner(offsets.size());
  for (std::size_t j = 0; j < offsets.size(); ++j) {
    std::array<int, 3> c{0, 0, 0};
    for (int a = 0; a < grid.d; ++a) c[a] = grid.wrap(ac[a] + offsets[j][a]);
    partner[j] = grid.index(c);
  }
  std::vector<std::vector<double>> products(offsets.size(), std::vector<double>(n_samples));
  for (std::size_t s = 0; s < n_samples; ++s) {
    FieldSample f = draw_field(k, rng::derive_seed(seed, s));
    double base = f.values[anchor];
    for (std::size_t j = 0; j < offsets.size(); ++j)
      products[j][s] = base * f.values[partner[j]];
  }
  CovarianceEstimate est;
  est.offsets = offsets;
  est.n_samples = n_samples;
  for (std::size_t j = 0; j < offsets.size(); ++j) {
    MeanSe m = mean_with_se(products[j]);
    std::array<int, 3> c{0, 0, 0};
    for (int a = 0; a < grid.d; ++a) c[a] = grid.wrap(offsets[j][a]);
    double theo = k.kappa[grid.index(c)];
    est.empirical.push_back(m.value);
    est.theoretical.push_back(theo);
    est.se.push_back(m.se);
    double dev = std::fabs(m.value - theo);
    double units = m.se > 0.0 ? dev / m.se : (dev == 0.0 ? 0.0 : HUGE_VAL);
    est.max_abs_deviation = std::max(est.max_abs_deviation, units);
  }
  return est;
}

WhiteNoiseEps coarsen_noise(const WhiteNoiseEps& fine, int coarse_n) {
  const TorusGrid& fg = fine.grid;
  if (coarse_n < 1 || fg.n % coarse_n != 0)
    throw Error("refinement-non-nested", "coarse resolution must divide the fine one");
  int r = fg.n / coarse_n;
  WhiteNoiseEps coarse;
  coarse.grid = TorusGrid{fg.d, coarse_n, fg.side};
  coarse.seed = fine.seed;
  coarse.coeffs.assign(coarse.grid.cell_count(), 0.0);
  for (std::size_t ci = 0; ci < coarse.coeffs.size(); ++ci) {
    auto cc = coarse.grid.coords(ci);
    double acc = 0.0;
    std::array<int, 3> j{0, 0, 0};
    int j2_hi = fg.d == 3 ? r : 1;
    for (j[0] = 0; j[0] < r; ++j[0]) {
      for (j[1] = 0; j[1] < r; ++j[1]) {
        for (j[2] = 0; j[2] < j2_hi; ++j[2]) {
          std::array<int, 3> fc{0, 0, 0};
          for (int a = 0; a < fg.d; ++a) fc[a] = cc[a] * r + j[a];
          acc += fine.coeffs[fg.index(fc)];
        }
      }
    }
    coarse.coeffs[ci] = acc;
  }
  return coarse;
}

std::vector<RefinementRow> approximation_error_scan(const KernelSpec& k_spec, double side,
                                                    const std::vector<int>& n_list,
                                                    std::size_t n_samples, std::uint64_t seed) {
  if (n_list.size() < 2) throw Error("refinement-non-nested", "need at least two resolutions");
  for (std::size_t i = 0; i + 1 < n_list.size(); ++i) {
    if (n_list[i + 1] <= n_list[i] || n_list[i + 1] % n_list[i] != 0)
      throw Error("refinement-non-nested", "resolutions must increase and divide each other");
  }
  int d = 2;
  std::vector<Kernel> kernels;
  for (int n : n_list) kernels.push_back(make_kernel(k_spec, TorusGrid{d, n, side}));
  TorusGrid finest = kernels.back().grid;

  std::size_t levels = n_list.size();
  std::vector<std::vector<double>> sup_acc(levels - 1, std::vector<double>(n_samples));
  std::vector<std::vector<double>> ms_acc(levels - 1, std::vector<double>(n_samples));
  for (std::size_t s = 0; s < n_samples; ++s) {
    WhiteNoiseEps w_fine = draw_white_noise(finest, rng::derive_seed(seed, s));
    std::vector<FieldSample> fields(levels);
    for (std::size_t i = 0; i < levels; ++i) {
      WhiteNoiseEps w = i + 1 == levels ? w_fine : coarsen_noise(w_fine, n_list[i]);
      fields[i] = convolve_field(kernels[i], w);
    }
    for (std::size_t i = 0; i + 1 < levels; ++i) {
      const TorusGrid& cg = fields[i].grid;
      const TorusGrid& fg = fields[i + 1].grid;
      int r = fg.n / cg.n;
      double sup = 0.0, sq = 0.0;
      for (std::size_t ci = 0; ci < cg.cell_count(); ++ci) {
        auto cc = cg.coords(ci);
        std::array<int, 3> fc{0, 0, 0};
        for (int a = 0; a < d; ++a) fc[a] = cc[a] * r;
        double diff = fields[i].values[ci] - fields[i + 1].values[fg.index(fc)];
        sup = std::max(sup, std::fabs(diff));
        sq += diff * diff;
      }
      sup_acc[i][s] = sup;
      ms_acc[i][s] = sq / static_cast<double>(cg.cell_count());
    }
  }
  std::vector<RefinementRow> rows;
  for (std::size_t i = 0; i + 1 < levels; ++i) {
    RefinementRow row;
    row.n = n_list[i];
    row.mean_sup_error = pairwise_sum(sup_acc[i]) / n_samples;
    row.mean_square_error = pairwise_sum(ms_acc[i]) / n_samples;
    rows.push_back(row);
  }
  return rows;
}

FieldSample make_bandlimited_field(const TorusGrid& grid, std::uint64_t seed, int max_mode) {
  if (max_mode < 1 || max_mode >= grid.n / 2)
    throw Error("config-invalid", "need 1 <= max_mode < n/2");
  std::vector<double> xi(grid.cell_count());
  for (std::size_t i = 0; i < xi.size(); ++i)
    xi[i] = rng::normal(seed, rng::kPerturbation, 0, i);
  auto hat = fft_real(grid, xi);
  for (std::size_t i = 0; i < hat.size(); ++i) {
    auto c = grid.coords(i);
    bool keep = true;
    for (int a = 0; a < grid.d; ++a) {
      int freq = c[a] <= grid.n / 2 ? c[a] : c[a] - grid.n;  // signed frequency
      if (std::abs(freq) > max_mode) keep = false;
    }
    if (!keep) hat[i] = 0.0;
  }
  FieldSample v;
  v.grid = grid;
  v.seed = seed;
  v.kernel_id = "bandlimited";
  v.values = ifft_real(grid, hat);
  double sup = 0.0;
  for (double x : v.values) sup = std::max(sup, std::fabs(x));
  if (!(sup > 0.0)) throw Error("zero-kernel", "bandlimited perturbation vanished");
  for (double& x : v.values) x /= sup;
  return v;
}

SupNormDiagnostic sup_norm_diagnostic(const Kernel& k, std::size_t n_samples, std::uint64_t seed) {
  std::vector<double> sups(n_samples);
  for (std::size_t s = 0; s < n_samples; ++s) {
    FieldSample f = draw_field(k, rng::derive_seed(seed, s));
    double sup = 0.0;
    for (double v : f.values) sup = std::max(sup, std::fabs(v));
    sups[s] = sup;
  }
  SupNormDiagnostic diag;
  diag.mean_sup = pairwise_sum(sups) / n_samples;
  double volume = std::pow(k.grid.side, k.grid.d);
  diag.bound = k.sigma * std::sqrt(1.0 + std::fabs(std::log(volume)));
  return diag;
}

}  // namespace torusperc
