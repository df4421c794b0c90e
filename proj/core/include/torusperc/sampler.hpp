#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "torusperc/grid.hpp"
#include "torusperc/kernel.hpp"

namespace torusperc {

struct WhiteNoiseEps {
  TorusGrid grid;
  std::vector<double> coeffs;  // iid N(0, cell_volume), indexed like the grid
  std::uint64_t seed = 0;
};

struct FieldSample {
  TorusGrid grid;
  std::vector<double> values;
  std::string kernel_id;
  std::uint64_t seed = 0;
  double level_offset = 0.0;  // the l of f + l; threshold results subtract it
};

struct CovarianceEstimate {
  std::vector<std::array<int, 3>> offsets;
  std::vector<double> empirical;
  std::vector<double> theoretical;  // kappa at the same offsets
  std::vector<double> se;
  std::size_t n_samples = 0;
  double max_abs_deviation = 0.0;  // max over offsets of |emp - theo| / se
};

enum class SampleRoute { white_noise, spectral_oracle };

// White noise on the lattice: one centered normal of variance cell_volume per
// cell, a pure function of (seed, cell index).
WhiteNoiseEps draw_white_noise(const TorusGrid& grid, std::uint64_t seed);

// f(x) = sum_z W_z q(x - z), circular convolution via FFT.
FieldSample convolve_field(const Kernel& k, const WhiteNoiseEps& w);

// white_noise: draw_white_noise then convolve_field. spectral_oracle: filter
// an iid normal array through sqrt of the DFT of kappa, giving exact
// covariance kappa at lattice offsets. Throws spectrum-negative if the DFT of
// kappa dips below -1e-9 * sigma^2 (round-off dust below that is clamped).
FieldSample draw_field(const Kernel& k, std::uint64_t seed,
                       SampleRoute route = SampleRoute::white_noise);

// Empirical Cov(f(anchor), f(anchor + offset)) over n_samples independent
// fields, against the kernel's kappa.
CovarianceEstimate estimate_covariance(const Kernel& k, std::size_t n_samples, std::uint64_t seed,
                                       const std::vector<std::array<int, 3>>& offsets,
                                       std::size_t anchor = 0);

// Sum the 2^d child coefficients of each coarse cell. Children of coarse cell
// volume sum to exactly the coarse variance, so this is the lossless coupling
// between nested resolutions.
WhiteNoiseEps coarsen_noise(const WhiteNoiseEps& fine, int coarse_n);

struct RefinementRow {
  int n = 0;                      // coarser of the two coupled resolutions
  double mean_sup_error = 0.0;    // E sup |f_n - f_2n| over the coarse lattice
  double mean_square_error = 0.0; // E mean of (f_n - f_2n)^2 over the coarse lattice
};

// Couples consecutive resolutions through one shared finest white noise per
// sample and reports the inter-level errors. n_list must be increasing with
// each entry dividing the next.
std::vector<RefinementRow> approximation_error_scan(const KernelSpec& k_spec, double side,
                                                    const std::vector<int>& n_list,
                                                    std::size_t n_samples, std::uint64_t seed);

struct SupNormDiagnostic {
  double mean_sup = 0.0;
  double bound = 0.0;  // sigma * sqrt(1 + |ln |T||)
};

SupNormDiagnostic sup_norm_diagnostic(const Kernel& k, std::size_t n_samples, std::uint64_t seed);

// Smooth perturbation direction for difference-quotient probes: Gaussian noise
// low-passed to |signed frequency| <= max_mode per axis, then scaled so
// sup |v| = 1 exactly. Requires 1 <= max_mode < n/2.
FieldSample make_bandlimited_field(const TorusGrid& grid, std::uint64_t seed, int max_mode);

}  // namespace torusperc
