#include "torusperc/duality.hpp"

#include <numeric>
#include <set>

#include "torusperc/errors.hpp"
#include "torusperc/unionfind.hpp"

#include "event_tracker.hpp"

namespace torusperc {

namespace {

// all distinct nonzero cycle classes of the open set under one connectivity
std::vector<std::array<int, 3>> winding_classes(const FieldSample& f, bool positive_phase,
                                                int connectivity) {
  const TorusGrid& g = f.grid;
  detail::NeighborSet neigh = detail::neighbor_set(g.d, connectivity);
  PeriodicUnionFind uf(g.cell_count(), g.d);
  std::vector<std::uint8_t> active(g.cell_count(), 0);
  std::set<std::array<int, 3>> classes;
  int n = g.n;
  for (std::size_t i = 0; i < f.values.size(); ++i) {
    double v = f.values[i] + f.level_offset;
    bool open = positive_phase ? v > 0.0 : v < 0.0;
    if (!open) continue;
    active[i] = 1;
    auto c = g.coords(i);
    for (int k = 0; k < neigh.count; ++k) {
      const auto& off = neigh.offsets[k];
      std::array<int, 3> raw{0, 0, 0};
      std::array<int, 3> wrap{0, 0, 0};
      for (int a = 0; a < g.d; ++a) {
        raw[a] = c[a] + off[a];
        if (raw[a] == n)
          wrap[a] = 1;
        else if (raw[a] == -1)
          wrap[a] = -1;
      }
      std::size_t nb = g.index(raw);
      if (!active[nb]) continue;
      UnionOutcome out = uf.unite(i, nb, wrap);
      if (!out.merged) {
        bool nonzero = false;
        for (int a = 0; a < g.d; ++a) nonzero = nonzero || out.cycle_class[a] != 0;
        if (nonzero) classes.insert(out.cycle_class);
      }
    }
  }
  return std::vector<std::array<int, 3>>(classes.begin(), classes.end());
}

int det2(const std::array<int, 3>& a, const std::array<int, 3>& b) {
  return a[0] * b[1] - a[1] * b[0];
}

int rank2(const std::vector<std::array<int, 3>>& v) {
  bool any = false;
  for (const auto& a : v) any = any || a[0] != 0 || a[1] != 0;
  if (!any) return 0;
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j)
      if (det2(v[i], v[j]) != 0) return 2;
  return 1;
}

// the classes generate all of Z^2 iff both Smith invariants are 1: gcd of the
// entries and gcd of the 2x2 minors
bool spans_z2(const std::vector<std::array<int, 3>>& v) {
  int g1 = 0, g2 = 0;
  for (const auto& a : v) {
    g1 = std::gcd(g1, std::gcd(a[0], a[1]));
  }
  for (std::size_t i = 0; i < v.size(); ++i)
    for (std::size_t j = i + 1; j < v.size(); ++j) g2 = std::gcd(g2, det2(v[i], v[j]));
  return g1 == 1 && g2 == 1;
}

}  // namespace

DualityCase duality_classify(const FieldSample& f, int pos_connectivity, int neg_connectivity) {
  if (f.grid.d != 2)
    throw Error("unsupported-dimension", "the winding trichotomy is two-dimensional");
  DualityCase out;
  out.pos_classes = winding_classes(f, true, pos_connectivity);
  out.neg_classes = winding_classes(f, false, neg_connectivity);

  out.orthogonal = true;
  for (const auto& p : out.pos_classes)
    for (const auto& m : out.neg_classes)
      if (det2(p, m) != 0) out.orthogonal = false;

  std::vector<std::array<int, 3>> combined = out.pos_classes;
  combined.insert(combined.end(), out.neg_classes.begin(), out.neg_classes.end());
  if (spans_z2(out.pos_classes) && out.neg_classes.empty()) {
    out.kind = DualityKind::positive_surjective;
    out.ok = true;
  } else if (spans_z2(out.neg_classes) && out.pos_classes.empty()) {
    out.kind = DualityKind::negative_surjective;
    out.ok = true;
  } else if (rank2(combined) <= 1) {
    out.kind = DualityKind::colinear;
    out.ok = true;
  }
  return out;
}

}  // namespace torusperc
