#pragma once

#include "torusperc/sampler.hpp"

namespace torusperc {

struct MorseReport {
  int n_max = 0;
  int n_min = 0;
  int n_saddle = 0;  // counted with multiplicity (k-2)/2 for k sign changes
  int euler = 0;     // n_min - n_saddle + n_max; 0 on the 2-torus when nondegenerate
  bool distinct_critical_values = false;  // pairwise gaps above 1e-12
  double min_critical_gap = 0.0;
  bool degenerate = false;  // some neighbor pair ties exactly; counts use index order
};

// Discrete critical cells from the sign pattern of neighbor differences around
// the six-neighbor triangulated link (axis steps plus one diagonal), the
// coarsest neighborhood whose saddle count balances the Euler characteristic
// on the torus. Two-dimensional grids only.
MorseReport morse_report(const FieldSample& f);

}  // namespace torusperc
