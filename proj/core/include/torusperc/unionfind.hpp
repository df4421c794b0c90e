#pragma once

#include <array>
#include <cstddef>
#include <cstdint>
#include <optional>
#include <vector>

namespace torusperc {

struct UnionOutcome {
  bool merged = false;  // false: u and v were already connected, cycle_class is set
  std::array<int, 3> cycle_class{0, 0, 0};
};

// Union-find over lattice cells that tracks, per node, the integer wrap
// displacement to its root (how many times the path to the root crosses each
// seam of the fundamental domain). Closing an edge inside one component then
// yields the homology class of the new cycle: offset(u) + wrap(edge) - offset(v).
// Path compression folds offsets so the invariant offset(root) = 0 holds
// throughout. Not thread safe; one instance per sweep.
class PeriodicUnionFind {
 public:
  PeriodicUnionFind(std::size_t count, int d);

  std::size_t find(std::size_t x);

  // wrap: seam crossings of the edge from u to v, per axis in {-1, 0, 1}
  UnionOutcome unite(std::size_t u, std::size_t v, const std::array<int, 3>& wrap);

  // valid immediately after find(x) touched x
  const std::array<int, 3>& offset(std::size_t x) const { return offset_[x]; }

  std::size_t count() const { return parent_.size(); }
  int dims() const { return d_; }

  // first nonzero cycle class ever reported, kept for quick realization checks
  const std::optional<std::array<int, 3>>& wrap_found() const { return wrap_found_; }

 private:
  int d_;
  std::vector<std::size_t> parent_;
  std::vector<std::uint8_t> rank_;
  std::vector<std::array<int, 3>> offset_;
  std::vector<std::size_t> path_;  // scratch for iterative compression
  std::optional<std::array<int, 3>> wrap_found_;
};

}  // namespace torusperc
