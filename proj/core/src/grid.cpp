#include "torusperc/grid.hpp"

#include <cmath>

#include "torusperc/errors.hpp"

namespace torusperc {

TorusGrid::TorusGrid(int d_, int n_, double side_) : d(d_), n(n_), side(side_) {
  if (d != 2 && d != 3)
    throw Error("unsupported-dimension", "d must be 2 or 3, got " + std::to_string(d));
  if (n < 1 || (n & (n - 1)) != 0)
    throw Error("grid-invalid", "n must be a power of two >= 1, got " + std::to_string(n));
  if (!(side > 0.0) || !std::isfinite(side))
    throw Error("grid-invalid", "side must be positive and finite");
}

double TorusGrid::cell_volume() const {
  double h = spacing();
  double v = h * h;
  if (d == 3) v *= h;
  return v;
}

std::size_t TorusGrid::cell_count() const {
  std::size_t c = static_cast<std::size_t>(n) * n;
  if (d == 3) c *= n;
  return c;
}

std::size_t TorusGrid::index(const std::array<int, 3>& c) const {
  std::size_t idx = static_cast<std::size_t>(wrap(c[0])) * n + wrap(c[1]);
  if (d == 3) idx = idx * n + wrap(c[2]);
  return idx;
}

std::array<int, 3> TorusGrid::coords(std::size_t idx) const {
  std::array<int, 3> c{0, 0, 0};
  if (d == 3) {
    c[2] = static_cast<int>(idx % n);
    idx /= n;
  }
  c[1] = static_cast<int>(idx % n);
  c[0] = static_cast<int>(idx / n);
  return c;
}

double TorusGrid::centered(double x) const {
  double y = std::fmod(x, side);
  if (y < -side / 2) y += side;
  if (y >= side / 2) y -= side;
  return y;
}

double TorusGrid::torus_dist2(const std::array<double, 3>& a, const std::array<double, 3>& b) const {
  double s = 0.0;
  for (int k = 0; k < d; ++k) {
    double dx = centered(a[k] - b[k]);
    s += dx * dx;
  }
  return s;
}

}  // namespace torusperc
