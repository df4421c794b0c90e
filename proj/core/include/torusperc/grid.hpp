#pragma once

#include <array>
#include <cstddef>
#include <cstdint>

namespace torusperc {

// Discretized d-torus [0, side)^d, d in {2, 3}, with n lattice points per axis
// at coordinates i * spacing, spacing = side / n. Cells are indexed row-major
// (last axis fastest). n must be a power of two; n >= 1 is accepted at the type
// level (degenerate grids appear in sampler corner cases), geometry code that
// needs room enforces its own floor.
struct TorusGrid {
  int d = 2;
  int n = 64;
  double side = 10.0;

  TorusGrid() = default;
  TorusGrid(int d_, int n_, double side_);  // validates, throws Error

  double spacing() const { return side / n; }
  double cell_volume() const;
  std::size_t cell_count() const;

  // row-major index <-> integer lattice coordinates
  std::size_t index(const std::array<int, 3>& c) const;
  std::array<int, 3> coords(std::size_t idx) const;

  int wrap(int i) const {
    int m = i % n;
    return m < 0 ? m + n : m;
  }

  // lattice point coordinate along one axis
  double point(int i) const { return i * spacing(); }

  // representative of x in [-side/2, side/2)
  double centered(double x) const;

  // squared torus distance between two physical points
  double torus_dist2(const std::array<double, 3>& a, const std::array<double, 3>& b) const;

  bool same_shape(const TorusGrid& o) const { return d == o.d && n == o.n && side == o.side; }
};

}  // namespace torusperc
