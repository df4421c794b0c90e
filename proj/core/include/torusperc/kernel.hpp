#pragma once

#include <array>
#include <functional>
#include <string>
#include <vector>

#include "torusperc/grid.hpp"

namespace torusperc {

enum class KernelFamily {
  bargmann_fock,               // q(x) = exp(-|x|^2 / width^2)
  oscillatory,                 // q(x) = (1 - osc_a |x|^2) exp(-|x|^2)
  truncated_polynomial_decay,  // q(x) = (1 + |x|^2)^(-beta/2), cutoff at r_cut
  constant,                    // q == constant_value on the whole torus
  custom_table,                // caller-supplied table or analytic evaluator
};

struct KernelSpec {
  KernelFamily family = KernelFamily::bargmann_fock;
  double width = 1.0;
  double osc_a = 0.05;
  double beta = 4.0;
  // Truncation radius in physical units. 0 disables truncation; required > 0
  // for truncated_polynomial_decay since its replica sum converges too slowly
  // to evaluate untruncated.
  double r_cut = 0.0;
  double constant_value = 1.0;
  bool normalize_sigma = true;
  // custom_table inputs: either a full table over grid cells (used verbatim,
  // row-major, no periodization) or an analytic evaluator on R^d that gets
  // truncated and periodized like the named families.
  std::vector<double> table;
  std::function<double(const std::array<double, 3>&)> analytic;
};

struct Kernel {
  KernelSpec spec;
  TorusGrid grid;
  std::vector<double> values;  // periodized q at cell coordinates, center at index 0
  std::vector<double> kappa;   // q*q circular convolution with cell-volume quadrature
  double sigma = 0.0;          // sqrt(kappa at offset 0)
  double l1_norm = 0.0;
  double l2_norm = 0.0;
  double alpha = 0.0;
  std::string id;  // digest of family, grid shape, and sampled values
};

struct ConditionTolerances {
  double weak_positivity_rel = 1e-12;   // min kappa >= -rel * sigma^2
  double strong_positivity_rel = 1e-12; // min q >= -rel * max|q|
  double symmetry_rel = 1e-12;          // max asymmetry <= rel * max|q|
  double decay_min_beta = 2.0;
  double nondegeneracy_rel = 1e-8;      // min eigenvalue >= rel * sigma^2
};

struct ConditionReport {
  struct WeakPositivity {
    bool pass = false;
    double min_kappa = 0.0;
  } weak_positivity;
  struct StrongPositivity {
    bool pass = false;
    double min_q = 0.0;
  } strong_positivity;
  struct Symmetry {
    bool pass = false;
    double max_asymmetry = 0.0;
  } symmetry;
  struct Decay {
    bool pass = false;
    double fitted_beta = 0.0;
  } decay;
  struct Nondegeneracy {
    bool pass = false;
    double min_eigenvalue = 0.0;
  } nondegeneracy;
  double sigma = 0.0;
  ConditionTolerances tolerances;

  bool all_pass() const {
    return weak_positivity.pass && strong_positivity.pass && symmetry.pass && decay.pass &&
           nondegeneracy.pass;
  }
};

// Samples the kernel onto the grid (truncate, periodize), computes kappa by
// FFT convolution, grid-quadrature norms and the concentration exponent.
// Throws kernel-underresolved when fewer than 8 cells span the characteristic
// width, zero-kernel when the sampled table vanishes identically.
Kernel make_kernel(const KernelSpec& spec, const TorusGrid& grid);

ConditionReport validate_conditions(const Kernel& k, const ConditionTolerances& tol = {});

// alpha(q) = [1 + |ln((l2/l1) * sqrt(|T|))|]^(-1/2); scale invariant, equals 1
// for constant kernels.
double alpha(const Kernel& k);

// Named presets for the config file. Unknown names throw kernel-invalid.
KernelSpec kernel_preset(const std::string& name);

// Flat key-value JSON block for the summary file.
std::string condition_report_json(const ConditionReport& r);

}  // namespace torusperc
