#pragma once

// Breadth-first reference implementations of the four event kinds plus a
// level-bisection threshold finder. Shares no graph code with the union-find
// sweep in core; only the geometric membership rules are restated here.

#include <algorithm>
#include <array>
#include <cmath>
#include <cstdint>
#include <deque>
#include <limits>
#include <vector>

#include "torusperc/events.hpp"
#include "torusperc/sampler.hpp"

namespace oracle {

using torusperc::EventKind;
using torusperc::EventSpec;
using torusperc::FieldSample;
using torusperc::TorusGrid;

inline std::vector<std::array<int, 3>> neighbor_offsets(int d, int connectivity) {
  std::vector<std::array<int, 3>> out;
  if (connectivity == 4) {
    for (int a = 0; a < d; ++a) {
      for (int s : {1, -1}) {
        std::array<int, 3> off{0, 0, 0};
        off[a] = s;
        out.push_back(off);
      }
    }
    return out;
  }
  const int lo2 = d == 3 ? -1 : 0;
  const int hi2 = d == 3 ? 1 : 0;
  for (int i = -1; i <= 1; ++i) {
    for (int j = -1; j <= 1; ++j) {
      for (int k = lo2; k <= hi2; ++k) {
        if (i == 0 && j == 0 && k == 0) continue;
        out.push_back({i, j, k});
      }
    }
  }
  return out;
}

// open-set membership; closed switches the excursion inequality to >=, which
// is what the bisection needs to land exactly on a cell value
inline std::vector<std::uint8_t> open_mask(const FieldSample& f, double level, bool closed) {
  std::vector<std::uint8_t> open(f.values.size(), 0);
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    // same association as the library: offset binds to the value first, so
    // levels taken from -(value + offset) sit exactly on the boundary
    const double v = (f.values[i] + f.level_offset) + level;
    open[i] = (closed ? v >= 0.0 : v > 0.0) ? 1 : 0;
  }
  return open;
}

// loop: some open component supports a cycle whose integer homology class has
// a nonzero coordinate on the winding axis. BFS assigns each cell an unwrapped
// lattice lift; a chord between visited cells with lifts differing by a
// non-lattice multiple closes such a cycle.
inline bool loop_realized(const TorusGrid& grid, const std::vector<std::uint8_t>& open, int axis,
                          int connectivity) {
  const auto offsets = neighbor_offsets(grid.d, connectivity);
  const std::size_t count = grid.cell_count();
  std::vector<std::uint8_t> visited(count, 0);
  std::vector<std::array<long, 3>> lift(count, {0, 0, 0});
  for (std::size_t start = 0; start < count; ++start) {
    if (!open[start] || visited[start]) continue;
    visited[start] = 1;
    lift[start] = {0, 0, 0};
    std::deque<std::size_t> queue{start};
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      const std::array<int, 3> cu = grid.coords(u);
      for (const auto& off : offsets) {
        std::array<int, 3> raw{0, 0, 0};
        std::array<long, 3> cand = lift[u];
        for (int a = 0; a < grid.d; ++a) {
          raw[a] = grid.wrap(cu[a] + off[a]);
          cand[a] += off[a];
        }
        const std::size_t v = grid.index(raw);
        if (!open[v]) continue;
        if (!visited[v]) {
          visited[v] = 1;
          lift[v] = cand;
          queue.push_back(v);
          continue;
        }
        const long wraps = (cand[axis] - lift[v][axis]) / grid.n;
        if (wraps != 0) return true;
      }
    }
  }
  return false;
}

// rectangle discretization shared by cross and cross_dagger: corner at
// floor(t/h), far edge at ceil((t+extent)/h), one extra row so both edges
// carry cells. Local coordinates never wrap; the global lookup does.
struct RectFrame {
  int lo[2] = {0, 0};
  int len[2] = {0, 0};
  int span_axis = 0;
};

inline RectFrame rect_frame(const TorusGrid& grid, const EventSpec& spec) {
  RectFrame fr;
  fr.span_axis = ((spec.placement.rotation_quarter % 2) + 2) % 2;
  const double span = (spec.kind == EventKind::cross ? 6.0 : 3.0) * spec.R;
  const double cross = 4.0 * spec.R;
  double ext[2];
  ext[fr.span_axis] = span;
  ext[1 - fr.span_axis] = cross;
  const double h = grid.spacing();
  for (int a = 0; a < 2; ++a) {
    const double t = spec.placement.translation[a];
    fr.lo[a] = static_cast<int>(std::floor(t / h));
    const int hi = static_cast<int>(std::ceil((t + ext[a]) / h));
    fr.len[a] = hi - fr.lo[a] + 1;
  }
  return fr;
}

inline bool crossing_realized(const TorusGrid& grid, const std::vector<std::uint8_t>& open,
                              const EventSpec& spec, int connectivity) {
  const RectFrame fr = rect_frame(grid, spec);
  const auto offsets = neighbor_offsets(2, connectivity);
  const double h = grid.spacing();
  const int cross_axis = 1 - fr.span_axis;
  const double slot_h = 4.0 * spec.R / spec.slots_per_side;
  const int slots[2] = {spec.slot_left, spec.slot_right};
  double slot_low[2] = {0.0, 0.0};
  double slot_high[2] = {0.0, 0.0};
  for (int side = 0; side < 2; ++side) {
    if (slots[side] < 0) continue;
    slot_low[side] = spec.placement.translation[cross_axis] + slots[side] * slot_h;
    slot_high[side] = slot_low[side] + slot_h;
  }

  auto global_index = [&](int la, int lb) {
    std::array<int, 3> c{grid.wrap(fr.lo[0] + la), grid.wrap(fr.lo[1] + lb), 0};
    return grid.index(c);
  };
  auto terminal = [&](int side, int la, int lb) {
    const int ls = fr.span_axis == 0 ? la : lb;
    if (side == 0 && ls != 0) return false;
    if (side == 1 && ls != fr.len[fr.span_axis] - 1) return false;
    if (slots[side] < 0) return true;
    const int lc = fr.span_axis == 0 ? lb : la;
    const double coord = (fr.lo[cross_axis] + lc) * h;
    return coord >= slot_low[side] && coord < slot_high[side];
  };

  std::vector<std::uint8_t> visited(static_cast<std::size_t>(fr.len[0]) * fr.len[1], 0);
  std::deque<std::pair<int, int>> queue;
  for (int la = 0; la < fr.len[0]; ++la) {
    for (int lb = 0; lb < fr.len[1]; ++lb) {
      if (!terminal(0, la, lb)) continue;
      if (!open[global_index(la, lb)]) continue;
      const std::size_t loc = static_cast<std::size_t>(la) * fr.len[1] + lb;
      if (!visited[loc]) {
        visited[loc] = 1;
        queue.emplace_back(la, lb);
      }
    }
  }
  while (!queue.empty()) {
    const auto [la, lb] = queue.front();
    queue.pop_front();
    if (terminal(1, la, lb)) return true;
    for (const auto& off : offsets) {
      const int na = la + off[0];
      const int nb = lb + off[1];
      if (na < 0 || na >= fr.len[0] || nb < 0 || nb >= fr.len[1]) continue;
      const std::size_t loc = static_cast<std::size_t>(na) * fr.len[1] + nb;
      if (visited[loc] || !open[global_index(na, nb)]) continue;
      visited[loc] = 1;
      queue.emplace_back(na, nb);
    }
  }
  return false;
}

// circuit: a cycle inside the annulus with nonzero winding around the center.
// Winding is counted by signed crossings of the ray {y = 0, x > 0} from the
// center, accumulated as an integer lift along the BFS tree.
inline bool circuit_realized(const TorusGrid& grid, const std::vector<std::uint8_t>& open,
                             const EventSpec& spec, int connectivity) {
  const std::size_t count = grid.cell_count();
  const double r1sq = spec.r1 * spec.r1;
  const double r2sq = spec.r2 * spec.r2;
  std::vector<std::uint8_t> member(count, 0);
  std::vector<std::array<double, 2>> rel(count, {0.0, 0.0});
  for (std::size_t i = 0; i < count; ++i) {
    const auto c = grid.coords(i);
    const double dx = grid.centered(grid.point(c[0]) - spec.placement.translation[0]);
    const double dy = grid.centered(grid.point(c[1]) - spec.placement.translation[1]);
    const double d2 = dx * dx + dy * dy;
    if (d2 < r1sq || d2 > r2sq) continue;
    member[i] = 1;
    rel[i] = {dx, dy};
  }

  const auto offsets = neighbor_offsets(2, connectivity);
  auto ray_step = [&](std::size_t u, std::size_t v) {
    const bool su = rel[u][1] >= 0.0;
    const bool sv = rel[v][1] >= 0.0;
    if (su != sv && (rel[u][0] + rel[v][0]) > 0.0) return sv ? 1 : -1;
    return 0;
  };

  std::vector<std::uint8_t> visited(count, 0);
  std::vector<long> wind(count, 0);
  for (std::size_t start = 0; start < count; ++start) {
    if (!member[start] || !open[start] || visited[start]) continue;
    visited[start] = 1;
    wind[start] = 0;
    std::deque<std::size_t> queue{start};
    while (!queue.empty()) {
      const std::size_t u = queue.front();
      queue.pop_front();
      const auto cu = grid.coords(u);
      for (const auto& off : offsets) {
        const std::array<int, 3> raw{grid.wrap(cu[0] + off[0]), grid.wrap(cu[1] + off[1]), 0};
        const std::size_t v = grid.index(raw);
        if (!member[v] || !open[v]) continue;
        const long cand = wind[u] + ray_step(u, v);
        if (!visited[v]) {
          visited[v] = 1;
          wind[v] = cand;
          queue.push_back(v);
          continue;
        }
        if (cand != wind[v]) return true;
      }
    }
  }
  return false;
}

inline bool event_realized(const FieldSample& f, double level, const EventSpec& spec,
                           bool closed = false, int connectivity = 4) {
  const auto open = open_mask(f, level, closed);
  switch (spec.kind) {
    case EventKind::loop: {
      const int axis =
          ((spec.placement.rotation_quarter % f.grid.d) + f.grid.d) % f.grid.d;
      return loop_realized(f.grid, open, axis, connectivity);
    }
    case EventKind::cross:
    case EventKind::cross_dagger:
      return crossing_realized(f.grid, open, spec, connectivity);
    case EventKind::circuit:
      return circuit_realized(f.grid, open, spec, connectivity);
  }
  return false;
}

// Threshold by bisection over the sorted cell levels: the smallest candidate
// at which the closed excursion set realizes the event. Mirrors the infimum
// the sweep reports without sharing any of its machinery.
inline double threshold_bisect(const FieldSample& f, const EventSpec& spec,
                               int connectivity = 4) {
  std::vector<double> candidates;
  candidates.reserve(f.values.size());
  for (double v : f.values) candidates.push_back(-(v + f.level_offset));
  std::sort(candidates.begin(), candidates.end());
  candidates.erase(std::unique(candidates.begin(), candidates.end()), candidates.end());

  std::size_t lo = 0;
  std::size_t hi = candidates.size() - 1;
  if (!event_realized(f, candidates[hi], spec, true, connectivity)) {
    return std::numeric_limits<double>::infinity();
  }
  // invariant: realized at candidates[hi], lo is the first untested index
  while (lo < hi) {
    const std::size_t mid = lo + (hi - lo) / 2;
    if (event_realized(f, candidates[mid], spec, true, connectivity)) {
      hi = mid;
    } else {
      lo = mid + 1;
    }
  }
  return candidates[lo];
}

}  // namespace oracle
