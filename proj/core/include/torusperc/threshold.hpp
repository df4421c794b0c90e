#pragma once

#include <array>
#include <cstdint>
#include <vector>

#include "torusperc/events.hpp"
#include "torusperc/sampler.hpp"

namespace torusperc {

struct ThresholdResult {
  // infimum of levels l such that {f + l > 0} realizes the event; +inf when
  // even the full torus does not (degenerate circuit annuli)
  double t_value = 0.0;
  // field value at the triggering cell, equal to -t_value when realized
  double merge_level = 0.0;
  // triggering cell, the discrete stand-in for the critical point; -1s when
  // the event never realizes
  std::array<int, 3> saddle_cell{-1, -1, -1};
  std::array<int, 3> realizing_class{0, 0, 0};
  // hash of the inserted-cell sequence through the trigger plus its value;
  // identical inputs give identical digests across runs and job counts
  std::uint64_t sweep_order_digest = 0;
  bool realized = false;
};

// Descending sweep: cells enter in order of decreasing value (ties broken by
// ascending index), each unioning with previously entered neighbors, until
// the event is realized. Runs in one sort plus near-linear union-find time.
ThresholdResult threshold_sweep(const FieldSample& f, const EventSpec& e, int connectivity = 4);

struct SaddleDerivativeRow {
  double t = 0.0;
  double quotient = 0.0;   // (T(f) - T(f + t v)) / t, signed to match v(saddle)
  double predicted = 0.0;  // v at the unperturbed sweep's triggering cell
};

// Finite-difference probe of the threshold's directional derivative along a
// perturbation v with sup norm <= 1.
std::vector<SaddleDerivativeRow> saddle_derivative_check(const FieldSample& f, const EventSpec& e,
                                                         const FieldSample& v,
                                                         const std::vector<double>& t_list,
                                                         int connectivity = 4);

}  // namespace torusperc
