#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

#include "torusperc/events.hpp"
#include "torusperc/kernel.hpp"
#include "torusperc/sampler.hpp"
#include "torusperc/stats.hpp"

namespace torusperc {

// One configuration drives every Monte Carlo harness. Harnesses read the
// fields they need and validate the rest; scan-style harnesses take their
// abscissas from the list fields (sides, R_list, r_list, L_list).
struct MCConfig {
  KernelSpec kernel_spec;
  int d = 2;
  // grid resolution; 0 derives the smallest power of two with at least four
  // cells per kernel unit (next_pow2(4 * side))
  int n = 0;
  double side_factor = 10.0;  // torus side = side_factor * R
  double R = 1.0;             // rectangle scale
  std::vector<EventSpec> events;
  std::vector<double> levels;
  std::size_t n_samples = 1000;  // >= 100 for any CI-bearing output
  std::uint64_t master_seed = 1;
  SampleRoute route = SampleRoute::white_noise;
  int jobs = 1;

  std::vector<double> sides;   // variance_scan torus sides, kernel units
  std::vector<double> R_list;  // crossing_curve rectangle scales
  std::vector<double> r_list;  // circuit_scan inner radii
  std::vector<int> L_list;     // circuit_scan outer/inner radius ratios
  int gluing_L = 3;            // implication_audit gluing scale factor
};

struct Estimate {
  std::string name;
  double value = 0.0;
  double se = 0.0;
  std::size_t n = 0;
};

struct MCResult {
  std::string experiment;
  std::vector<Estimate> estimates;
  std::vector<BoundCheck> checks;
  // deterministic per-sample audits; any nonzero count fails the run
  std::size_t loop_to_cross_violations = 0;
  std::size_t gluing_violations = 0;
  std::size_t coupling_violations = 0;
  std::string csv;          // complete table for this harness, header included
  std::string config_echo;  // canonical key=value lines, enough to rerun
  // hash over per-sample outcomes in sample order; identical for identical
  // (config, master_seed) regardless of the job count
  std::uint64_t artifacts_digest = 0;
  // measured here for operator feedback, deliberately absent from csv and
  // json so that reruns produce byte-identical files
  double wall_clock_seconds = 0.0;

  bool all_pass() const;
};

// explicit cfg.n, or the resolution rule next_pow2(4 * side)
int resolve_grid_n(const MCConfig& cfg, double side);

std::string mc_config_echo(const MCConfig& cfg);

// estimates, checks and violation counts as a JSON object (sorted keys);
// wall clock excluded by design
std::string mc_result_json(const MCResult& r);

// Loop-threshold variance against the concentration exponent over growing
// torus sides (cfg.sides). The product column Var / alpha^2 is the empirical
// stand-in for the bounded constant; consecutive sides are checked for
// product non-growth (3 SE) and strict variance decrease.
MCResult variance_scan(const MCConfig& cfg);

// P[T <= 0] and P[T >= 0] against the 1/4 lower bounds, plus their
// complementarity (the two indicators cover every sample).
MCResult quarter_bound_test(const MCConfig& cfg);

// Tail probabilities P[T >= sigma*eps] and P[T <= -sigma*eps] against the
// variance-over-level-squared envelope 4 Var / (sigma eps)^2, for each eps in
// eps_list. Each eps must clear the applicability floor 2a/t measured from
// the same samples.
MCResult concentration_tail_test(const MCConfig& cfg, const std::vector<double>& eps_list);

// Lengthwise crossing probability over cfg.R_list x cfg.levels, one shared
// field per (R, sample) evaluated at every level, so the level rows are
// exactly monotone-coupled.
MCResult crossing_curve(const MCConfig& cfg);

// Empirical P(A and B) - P(A) P(B) with a delta-method SE, checked >= -3 SE.
// The harness only accepts increasing events; callers wrapping a complement
// must say so and are rejected.
MCResult fkg_test(const MCConfig& cfg, const EventSpec& a, const EventSpec& b,
                  bool a_is_increasing = true, bool b_is_increasing = true);

// Per-sample deterministic inclusions: every realized winding loop must cross
// one of the 2 * side_factor^2 grid-placed dagger rectangles, and whenever the
// two slotted daggers and the joining circuit co-occur the long rectangle must
// be crossed. Violation counts must be zero.
MCResult implication_audit(const MCConfig& cfg);

// Circuit probability over annuli (r, L*r) for r in r_list, L in L_list,
// checked nondecreasing in L at fixed r.
MCResult circuit_scan(const MCConfig& cfg);

// Union-root maps: phi_n(p, N) = 1 - (1-p)^(1/N) lower-bounds the best single
// event in an N-fold union of positively associated events; psi_l is the same
// map at N = 16 L^2.
double phi_n(double p, std::uint64_t n_events);
double psi_l(double p, std::uint64_t l_factor);

}  // namespace torusperc
