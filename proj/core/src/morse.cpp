#include "torusperc/morse.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "torusperc/errors.hpp"

namespace torusperc {

MorseReport morse_report(const FieldSample& f) {
  const TorusGrid& g = f.grid;
  if (g.d != 2) throw Error("unsupported-dimension", "Morse diagnostics are two-dimensional");
  // cyclic ring of the triangulated six-neighbor link
  static constexpr int ring[6][2] = {{1, 0}, {1, 1}, {0, 1}, {-1, 0}, {-1, -1}, {0, -1}};
  MorseReport rep;
  std::vector<double> critical_values;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    auto c = g.coords(i);
    double center = f.values[i];
    bool up[6];
    for (int j = 0; j < 6; ++j) {
      std::array<int, 3> nc{c[0] + ring[j][0], c[1] + ring[j][1], 0};
      std::size_t ni = g.index(nc);
      double diff = f.values[ni] - center;
      if (diff == 0.0) {
        rep.degenerate = true;
        // tie order matches the sweep: smaller index counts as the larger value
        up[j] = ni < i;
      } else {
        up[j] = diff > 0.0;
      }
    }
    int changes = 0;
    for (int j = 0; j < 6; ++j) changes += up[j] != up[(j + 1) % 6];
    if (changes == 0) {
      if (up[0])
        ++rep.n_min;
      else
        ++rep.n_max;
      critical_values.push_back(center);
    } else if (changes >= 4) {
      rep.n_saddle += (changes - 2) / 2;
      critical_values.push_back(center);
    }
  }
  rep.euler = rep.n_min - rep.n_saddle + rep.n_max;
  double gap = std::numeric_limits<double>::infinity();
  std::sort(critical_values.begin(), critical_values.end());
  for (std::size_t j = 1; j < critical_values.size(); ++j)
    gap = std::min(gap, critical_values[j] - critical_values[j - 1]);
  rep.min_critical_gap = gap;
  rep.distinct_critical_values = gap > 1e-12;
  return rep;
}

}  // namespace torusperc
