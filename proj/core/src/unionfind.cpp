#include "torusperc/unionfind.hpp"

#include "torusperc/errors.hpp"

namespace torusperc {

PeriodicUnionFind::PeriodicUnionFind(std::size_t count, int d) : d_(d) {
  if (d < 1 || d > 3) throw Error("unsupported-dimension", "union-find tracks 1 to 3 axes");
  parent_.resize(count);
  for (std::size_t i = 0; i < count; ++i) parent_[i] = i;
  rank_.assign(count, 0);
  offset_.assign(count, {0, 0, 0});
}

std::size_t PeriodicUnionFind::find(std::size_t x) {
  std::size_t root = x;
  while (parent_[root] != root) root = parent_[root];
  // fold offsets top-down so every path node ends relative to the root
  path_.clear();
  for (std::size_t cur = x; cur != root; cur = parent_[cur]) path_.push_back(cur);
  for (std::size_t k = path_.size(); k-- > 0;) {
    std::size_t node = path_[k];
    if (parent_[node] != root) {
      for (int a = 0; a < d_; ++a) offset_[node][a] += offset_[parent_[node]][a];
      parent_[node] = root;
    }
  }
  return root;
}

UnionOutcome PeriodicUnionFind::unite(std::size_t u, std::size_t v,
                                      const std::array<int, 3>& wrap) {
  std::size_t ru = find(u);
  std::size_t rv = find(v);
  UnionOutcome out;
  if (ru == rv) {
    for (int a = 0; a < d_; ++a) out.cycle_class[a] = offset_[u][a] + wrap[a] - offset_[v][a];
    bool nonzero = false;
    for (int a = 0; a < d_; ++a) nonzero = nonzero || out.cycle_class[a] != 0;
    if (nonzero && !wrap_found_) wrap_found_ = out.cycle_class;
    return out;
  }
  out.merged = true;
  // attach the shallower root; offsets keep position(v) = position(u) + wrap
  if (rank_[ru] < rank_[rv]) {
    for (int a = 0; a < d_; ++a) offset_[ru][a] = offset_[v][a] - wrap[a] - offset_[u][a];
    parent_[ru] = rv;
  } else {
    for (int a = 0; a < d_; ++a) offset_[rv][a] = offset_[u][a] + wrap[a] - offset_[v][a];
    parent_[rv] = ru;
    if (rank_[ru] == rank_[rv]) ++rank_[ru];
  }
  return out;
}

}  // namespace torusperc
