#include "torusperc/events.hpp"

#include <cmath>

#include "torusperc/errors.hpp"

#include "event_tracker.hpp"

namespace torusperc {

namespace detail {

NeighborSet neighbor_set(int d, int connectivity) {
  if (connectivity != 4 && connectivity != 8)
    throw Error("config-invalid", "connectivity must be 4 (primal) or 8 (dual)");
  NeighborSet set;
  if (connectivity == 4) {
    for (int a = 0; a < d; ++a) {
      for (int s : {1, -1}) {
        std::array<int, 3> off{0, 0, 0};
        off[a] = s;
        set.offsets[set.count++] = off;
      }
    }
    return set;
  }
  std::array<int, 3> off{0, 0, 0};
  int lo2 = d == 3 ? -1 : 0;
  for (off[0] = -1; off[0] <= 1; ++off[0]) {
    for (off[1] = -1; off[1] <= 1; ++off[1]) {
      for (off[2] = lo2; off[2] <= (d == 3 ? 1 : 0); ++off[2]) {
        if (off[0] == 0 && off[1] == 0 && off[2] == 0) continue;
        set.offsets[set.count++] = off;
      }
    }
  }
  return set;
}

namespace {

std::size_t uf_size_for(const TorusGrid& grid, const EventSpec& spec) {
  switch (spec.kind) {
    case EventKind::loop:
      return grid.cell_count();
    default:
      return 0;  // rectangle and circuit trackers size their own UF in the ctor body
  }
}

}  // namespace

EventTracker::EventTracker(const TorusGrid& grid, const EventSpec& spec, int connectivity)
    : grid_(grid),
      spec_(spec),
      neigh_(neighbor_set(grid.d, connectivity)),
      uf_(uf_size_for(grid, spec), grid.d) {
  switch (spec_.kind) {
    case EventKind::loop: {
      winding_axis_ = ((spec_.placement.rotation_quarter % grid_.d) + grid_.d) % grid_.d;
      active_.assign(grid_.cell_count(), 0);
      return;
    }
    case EventKind::cross:
    case EventKind::cross_dagger: {
      if (grid_.d != 2)
        throw Error("unsupported-dimension", "crossing events are two-dimensional");
      if (!(spec_.R > 0.0)) throw Error("config-invalid", "crossing scale R must be positive");
      span_axis_ = ((spec_.placement.rotation_quarter % 2) + 2) % 2;
      double span = (spec_.kind == EventKind::cross ? 6.0 : 3.0) * spec_.R;
      double cross = 4.0 * spec_.R;
      double ext[2];
      ext[span_axis_] = span;
      ext[1 - span_axis_] = cross;
      double h = grid_.spacing();
      for (int a = 0; a < 2; ++a) {
        double t = spec_.placement.translation[a];
        lo_[a] = static_cast<int>(std::floor(t / h));
        int hi = static_cast<int>(std::ceil((t + ext[a]) / h));
        len_[a] = hi - lo_[a] + 1;
        if (len_[a] > grid_.n)
          throw Error("geometry-out-of-bounds", "rectangle does not fit in the torus");
      }
      std::size_t cells = static_cast<std::size_t>(len_[0]) * len_[1];
      left_node_ = cells;
      right_node_ = cells + 1;
      uf_ = PeriodicUnionFind(cells + 2, 2);
      active_.assign(cells, 0);
      int cross_axis = 1 - span_axis_;
      double slot_h = cross / spec_.slots_per_side;
      int slots[2] = {spec_.slot_left, spec_.slot_right};
      for (int side = 0; side < 2; ++side) {
        if (slots[side] < 0) continue;
        if (slots[side] >= spec_.slots_per_side)
          throw Error("config-invalid", "slot index outside the boundary subdivision");
        slot_limited_[side] = true;
        slot_low_[side] = spec_.placement.translation[cross_axis] + slots[side] * slot_h;
        slot_high_[side] = slot_low_[side] + slot_h;
      }
      return;
    }
    case EventKind::circuit: {
      if (grid_.d != 2)
        throw Error("unsupported-dimension", "circuit events are two-dimensional");
      if (spec_.r1 < 0.0 || spec_.r1 > spec_.r2 || !(spec_.r2 < grid_.side / 2.0))
        throw Error("geometry-out-of-bounds", "need 0 <= r1 <= r2 < side/2");
      local_id_.assign(grid_.cell_count(), -1);
      double r1sq = spec_.r1 * spec_.r1;
      double r2sq = spec_.r2 * spec_.r2;
      std::int32_t next = 0;
      for (std::size_t i = 0; i < grid_.cell_count(); ++i) {
        auto c = grid_.coords(i);
        double dx = grid_.centered(grid_.point(c[0]) - spec_.placement.translation[0]);
        double dy = grid_.centered(grid_.point(c[1]) - spec_.placement.translation[1]);
        double d2 = dx * dx + dy * dy;
        if (d2 < r1sq || d2 > r2sq) continue;
        local_id_[i] = next++;
        rel_.push_back({dx, dy});
      }
      uf_ = PeriodicUnionFind(static_cast<std::size_t>(next), 1);
      active_.assign(static_cast<std::size_t>(next), 0);
      return;
    }
  }
  throw Error("config-invalid", "unhandled event kind");
}

bool EventTracker::member(std::size_t cell) const {
  switch (spec_.kind) {
    case EventKind::loop:
      return true;
    case EventKind::cross:
    case EventKind::cross_dagger: {
      int la, lb;
      return rect_local(cell, &la, &lb);
    }
    case EventKind::circuit:
      return local_id_[cell] >= 0;
  }
  return false;
}

bool EventTracker::rect_local(std::size_t cell, int* la, int* lb) const {
  auto c = grid_.coords(cell);
  int n = grid_.n;
  // unwrap relative to the rectangle corner
  int a = c[0] - (((lo_[0] % n) + n) % n);
  if (a < 0) a += n;
  int b = c[1] - (((lo_[1] % n) + n) % n);
  if (b < 0) b += n;
  if (a >= len_[0] || b >= len_[1]) return false;
  *la = a;
  *lb = b;
  return true;
}

bool EventTracker::insert(std::size_t cell) {
  bool before = realized_;
  switch (spec_.kind) {
    case EventKind::loop:
      insert_loop(cell);
      break;
    case EventKind::cross:
    case EventKind::cross_dagger:
      insert_rect(cell);
      break;
    case EventKind::circuit:
      insert_circuit(cell);
      break;
  }
  return realized_ && !before;
}

void EventTracker::insert_loop(std::size_t cell) {
  active_[cell] = 1;
  auto c = grid_.coords(cell);
  int n = grid_.n;
  for (int k = 0; k < neigh_.count; ++k) {
    const auto& off = neigh_.offsets[k];
    std::array<int, 3> raw{0, 0, 0};
    std::array<int, 3> wrap{0, 0, 0};
    for (int a = 0; a < grid_.d; ++a) {
      raw[a] = c[a] + off[a];
      if (raw[a] == n)
        wrap[a] = 1;
      else if (raw[a] == -1)
        wrap[a] = -1;
    }
    std::size_t nb = grid_.index(raw);
    if (!active_[nb]) continue;
    UnionOutcome out = uf_.unite(cell, nb, wrap);
    if (!out.merged && out.cycle_class[winding_axis_] != 0) {
      realized_ = true;
      realizing_class_ = out.cycle_class;
    }
  }
}

void EventTracker::insert_rect(std::size_t cell) {
  int la, lb;
  if (!rect_local(cell, &la, &lb)) throw Error("geometry-out-of-bounds", "cell outside rectangle");
  std::size_t local = static_cast<std::size_t>(la) * len_[1] + lb;
  active_[local] = 1;
  std::array<int, 3> zero{0, 0, 0};
  for (int k = 0; k < neigh_.count; ++k) {
    const auto& off = neigh_.offsets[k];
    int na = la + off[0];
    int nb = lb + off[1];
    if (na < 0 || na >= len_[0] || nb < 0 || nb >= len_[1]) continue;
    std::size_t nloc = static_cast<std::size_t>(na) * len_[1] + nb;
    if (!active_[nloc]) continue;
    uf_.unite(local, nloc, zero);
  }
  int ls = span_axis_ == 0 ? la : lb;
  int lc = span_axis_ == 0 ? lb : la;
  int cross_axis = 1 - span_axis_;
  double coord = (lo_[cross_axis] + lc) * grid_.spacing();
  if (ls == 0 && (!slot_limited_[0] || (coord >= slot_low_[0] && coord < slot_high_[0])))
    uf_.unite(local, left_node_, zero);
  if (ls == len_[span_axis_] - 1 &&
      (!slot_limited_[1] || (coord >= slot_low_[1] && coord < slot_high_[1])))
    uf_.unite(local, right_node_, zero);
  if (uf_.find(left_node_) == uf_.find(right_node_)) realized_ = true;
}

void EventTracker::insert_circuit(std::size_t cell) {
  std::int32_t u = local_id_[cell];
  if (u < 0) throw Error("geometry-out-of-bounds", "cell outside annulus");
  active_[static_cast<std::size_t>(u)] = 1;
  auto c = grid_.coords(cell);
  for (int k = 0; k < neigh_.count; ++k) {
    const auto& off = neigh_.offsets[k];
    std::array<int, 3> raw{c[0] + off[0], c[1] + off[1], 0};
    std::size_t nb = grid_.index(raw);
    std::int32_t v = local_id_[nb];
    if (v < 0 || !active_[static_cast<std::size_t>(v)]) continue;
    // winding bookkeeping: count signed crossings of the ray {y = 0, x > 0}
    // from the annulus center
    const auto& pu = rel_[static_cast<std::size_t>(u)];
    const auto& pv = rel_[static_cast<std::size_t>(v)];
    std::array<int, 3> wrap{0, 0, 0};
    bool su = pu[1] >= 0.0;
    bool sv = pv[1] >= 0.0;
    if (su != sv && (pu[0] + pv[0]) > 0.0) wrap[0] = sv ? 1 : -1;
    UnionOutcome out =
        uf_.unite(static_cast<std::size_t>(u), static_cast<std::size_t>(v), wrap);
    if (!out.merged && out.cycle_class[0] != 0) {
      realized_ = true;
      realizing_class_ = out.cycle_class;
    }
  }
}

}  // namespace detail

EventSpec loop_event(int axis) {
  EventSpec e;
  e.kind = EventKind::loop;
  e.placement.rotation_quarter = axis;
  return e;
}

EventSpec cross_event(double R, const std::array<double, 3>& corner, int rotation_quarter) {
  EventSpec e;
  e.kind = EventKind::cross;
  e.R = R;
  e.placement.translation = corner;
  e.placement.rotation_quarter = rotation_quarter;
  return e;
}

EventSpec dagger_event(double R, const std::array<double, 3>& corner, int rotation_quarter) {
  EventSpec e;
  e.kind = EventKind::cross_dagger;
  e.R = R;
  e.placement.translation = corner;
  e.placement.rotation_quarter = rotation_quarter;
  return e;
}

EventSpec circuit_event(const std::array<double, 3>& center, double r1, double r2) {
  EventSpec e;
  e.kind = EventKind::circuit;
  e.placement.translation = center;
  e.r1 = r1;
  e.r2 = r2;
  return e;
}

std::string event_name(EventKind kind) {
  switch (kind) {
    case EventKind::loop:
      return "loop";
    case EventKind::cross:
      return "cross";
    case EventKind::cross_dagger:
      return "cross_dagger";
    case EventKind::circuit:
      return "circuit";
  }
  return "unknown";
}

EventDetail evaluate_event_detail(const FieldSample& f, double level, const EventSpec& spec,
                                  int connectivity) {
  detail::EventTracker tracker(f.grid, spec, connectivity);
  EventDetail out;
  // the offset joins each value before the level does: threshold results
  // report -(value + offset), and probing at that exact level must land on
  // the boundary instead of an ulp off
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    if (!(f.values[i] + f.level_offset + level > 0.0)) continue;
    if (!tracker.member(i)) continue;
    ++out.n_open;
    tracker.insert(i);
    if (tracker.realized()) break;
  }
  out.realized = tracker.realized();
  out.realizing_class = tracker.realizing_class();
  return out;
}

bool evaluate_event(const FieldSample& f, double level, const EventSpec& spec, int connectivity) {
  return evaluate_event_detail(f, level, spec, connectivity).realized;
}

}  // namespace torusperc
