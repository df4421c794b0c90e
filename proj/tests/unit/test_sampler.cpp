#include <doctest.h>

#include <cmath>
#include <vector>

#include "oracle_conv.hpp"
#include "torusperc/errors.hpp"
#include "torusperc/fft.hpp"
#include "torusperc/rng.hpp"
#include "torusperc/sampler.hpp"
#include "torusperc/stats.hpp"

using namespace torusperc;

TEST_CASE("white noise law: mean zero, variance cell volume") {
  TorusGrid grid(2, 64, 10.0);
  const WhiteNoiseEps w = draw_white_noise(grid, 5);
  REQUIRE(w.coeffs.size() == grid.cell_count());
  const double vol = grid.cell_volume();
  const MeanSe mean = mean_with_se(w.coeffs);
  CHECK(std::fabs(mean.value) < 4.0 * mean.se);
  const double var = sample_variance(w.coeffs);
  const double dof = static_cast<double>(w.coeffs.size() - 1);
  // chi-square 99% interval for the sample variance of normals
  CHECK(var / vol > chi2_quantile(0.005, dof) / dof);
  CHECK(var / vol < chi2_quantile(0.995, dof) / dof);
}

TEST_CASE("white noise is a pure function of seed and cell") {
  TorusGrid grid(2, 16, 4.0);
  const WhiteNoiseEps a = draw_white_noise(grid, 9);
  const WhiteNoiseEps b = draw_white_noise(grid, 9);
  CHECK(a.coeffs == b.coeffs);
  const WhiteNoiseEps c = draw_white_noise(grid, 10);
  CHECK(a.coeffs != c.coeffs);
}

TEST_CASE("field synthesis matches the direct convolution oracle") {
  TorusGrid grid(2, 16, 4.0);
  const Kernel k = make_kernel(KernelSpec{}, grid);
  const WhiteNoiseEps w = draw_white_noise(grid, 3);
  const FieldSample f = convolve_field(k, w);
  const auto direct = oracle::circular_convolve_direct(grid, k.values, w.coeffs);
  for (std::size_t i = 0; i < direct.size(); ++i) {
    CHECK(std::fabs(f.values[i] - direct[i]) < 1e-10);
  }
  CHECK(f.kernel_id == k.id);
  CHECK(f.seed == 3);
}

TEST_CASE("grid mismatch between kernel and noise") {
  const Kernel k = make_kernel(KernelSpec{}, TorusGrid(2, 64, 10.0));
  const WhiteNoiseEps w = draw_white_noise(TorusGrid(2, 32, 10.0), 1);
  CHECK_THROWS_AS(convolve_field(k, w), Error);
}

TEST_CASE("draw routes are deterministic and distinct") {
  TorusGrid grid(2, 64, 10.0);
  const Kernel k = make_kernel(KernelSpec{}, grid);
  const FieldSample w1 = draw_field(k, 4, SampleRoute::white_noise);
  const FieldSample w2 = draw_field(k, 4, SampleRoute::white_noise);
  CHECK(w1.values == w2.values);
  const FieldSample s1 = draw_field(k, 4, SampleRoute::spectral_oracle);
  const FieldSample s2 = draw_field(k, 4, SampleRoute::spectral_oracle);
  CHECK(s1.values == s2.values);
  CHECK(w1.values != s1.values);
}

TEST_CASE("empirical covariance tracks kappa on both routes") {
  TorusGrid grid(2, 32, 8.0);
  const Kernel k = make_kernel(KernelSpec{}, grid);
  const std::vector<std::array<int, 3>> offsets{
      {0, 0, 0}, {1, 0, 0}, {0, 2, 0}, {3, 3, 0}, {8, 0, 0}};
  const CovarianceEstimate est = estimate_covariance(k, 400, 21, offsets);
  REQUIRE(est.empirical.size() == offsets.size());
  CHECK(est.theoretical[0] == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(est.max_abs_deviation < 5.0);
  CHECK_THROWS_AS(estimate_covariance(k, 50, 21, offsets), Error);
}

TEST_CASE("coarsening sums children exactly and preserves the law") {
  TorusGrid fine(2, 32, 8.0);
  const WhiteNoiseEps w = draw_white_noise(fine, 13);
  const WhiteNoiseEps c = coarsen_noise(w, 8);
  CHECK(c.grid.n == 8);
  CHECK(c.grid.side == 8.0);
  CHECK(c.seed == w.seed);
  for (std::size_t ci = 0; ci < c.coeffs.size(); ++ci) {
    const auto cc = c.grid.coords(ci);
    double acc = 0.0;
    for (int i = 0; i < 4; ++i) {
      for (int j = 0; j < 4; ++j) {
        acc += w.coeffs[fine.index({cc[0] * 4 + i, cc[1] * 4 + j, 0})];
      }
    }
    CHECK(c.coeffs[ci] == acc);
  }
  const double var = sample_variance(c.coeffs);
  const double vol = c.grid.cell_volume();
  const double dof = static_cast<double>(c.coeffs.size() - 1);
  CHECK(var / vol > chi2_quantile(0.005, dof) / dof);
  CHECK(var / vol < chi2_quantile(0.995, dof) / dof);
  CHECK_THROWS_AS(coarsen_noise(w, 12), Error);
  CHECK_THROWS_AS(coarsen_noise(w, 64), Error);
}

TEST_CASE("refinement errors shrink under coupled noise") {
  const std::vector<int> n_list{16, 32, 64};
  const auto rows = approximation_error_scan(KernelSpec{}, 4.0, n_list, 20, 31);
  REQUIRE(rows.size() == 2);
  CHECK(rows[0].n == 16);
  CHECK(rows[1].n == 32);
  CHECK(rows[0].mean_sup_error > 0.0);
  CHECK(rows[1].mean_sup_error < rows[0].mean_sup_error);
  CHECK(rows[1].mean_square_error < 0.5 * rows[0].mean_square_error);
  CHECK_THROWS_AS(approximation_error_scan(KernelSpec{}, 4.0, {16, 24}, 10, 1), Error);
  CHECK_THROWS_AS(approximation_error_scan(KernelSpec{}, 4.0, {16}, 10, 1), Error);
}

TEST_CASE("bandlimited perturbation is normalized and within band") {
  TorusGrid grid(2, 64, 10.0);
  const FieldSample v = make_bandlimited_field(grid, 77, 4);
  double sup = 0.0;
  for (double x : v.values) sup = std::max(sup, std::fabs(x));
  CHECK(sup == 1.0);
  const auto hat = fft_real(grid, v.values);
  for (std::size_t i = 0; i < hat.size(); ++i) {
    const auto c = grid.coords(i);
    bool inside = true;
    for (int a = 0; a < 2; ++a) {
      const int freq = c[a] <= grid.n / 2 ? c[a] : c[a] - grid.n;
      if (std::abs(freq) > 4) inside = false;
    }
    if (!inside) CHECK(std::abs(hat[i]) < 1e-9);
  }
  const FieldSample v2 = make_bandlimited_field(grid, 77, 4);
  CHECK(v.values == v2.values);
  CHECK_THROWS_AS(make_bandlimited_field(grid, 1, 0), Error);
  CHECK_THROWS_AS(make_bandlimited_field(grid, 1, 32), Error);
}

TEST_CASE("sup norm diagnostic stays near its logarithmic envelope") {
  TorusGrid grid(2, 64, 10.0);
  const Kernel k = make_kernel(KernelSpec{}, grid);
  const SupNormDiagnostic diag = sup_norm_diagnostic(k, 50, 41);
  CHECK(diag.mean_sup > 0.0);
  CHECK(diag.bound == doctest::Approx(std::sqrt(1.0 + std::log(100.0))));
  CHECK(diag.mean_sup < 3.0 * diag.bound);
}
