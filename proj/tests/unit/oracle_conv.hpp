#pragma once

// Direct-summation circular convolution, the slow reference the FFT path is
// checked against. Independent of core/src/fft.cpp on purpose.

#include <array>
#include <vector>

#include "torusperc/grid.hpp"

namespace oracle {

inline std::vector<double> circular_convolve_direct(const torusperc::TorusGrid& grid,
                                                    const std::vector<double>& a,
                                                    const std::vector<double>& b) {
  const std::size_t count = grid.cell_count();
  std::vector<double> out(count, 0.0);
  for (std::size_t x = 0; x < count; ++x) {
    const std::array<int, 3> cx = grid.coords(x);
    double acc = 0.0;
    for (std::size_t y = 0; y < count; ++y) {
      const std::array<int, 3> cy = grid.coords(y);
      std::array<int, 3> diff{0, 0, 0};
      for (int ax = 0; ax < grid.d; ++ax) diff[ax] = grid.wrap(cx[ax] - cy[ax]);
      acc += a[y] * b[grid.index(diff)];
    }
    out[x] = acc;
  }
  return out;
}

}  // namespace oracle
