#pragma once

// Incremental event detection shared by the fixed-level evaluator and the
// descending threshold sweep. Cells are inserted one at a time; the tracker
// unions each new cell with its already-inserted neighbors and reports the
// insertion that first realizes the event. Internal to the library.

#include <array>
#include <cstdint>
#include <vector>

#include "torusperc/events.hpp"
#include "torusperc/grid.hpp"
#include "torusperc/unionfind.hpp"

namespace torusperc {
namespace detail {

struct NeighborSet {
  std::array<std::array<int, 3>, 26> offsets;
  int count = 0;
};

NeighborSet neighbor_set(int d, int connectivity);

class EventTracker {
 public:
  EventTracker(const TorusGrid& grid, const EventSpec& spec, int connectivity);

  // cells outside the event's support can never matter and may be skipped
  bool member(std::size_t cell) const;

  // insert an open member cell; returns true when the event just got realized
  bool insert(std::size_t cell);

  bool realized() const { return realized_; }
  const std::array<int, 3>& realizing_class() const { return realizing_class_; }

 private:
  void insert_loop(std::size_t cell);
  void insert_rect(std::size_t cell);
  void insert_circuit(std::size_t cell);

  const TorusGrid grid_;
  EventSpec spec_;
  NeighborSet neigh_;
  PeriodicUnionFind uf_;
  std::vector<std::uint8_t> active_;
  bool realized_ = false;
  std::array<int, 3> realizing_class_{0, 0, 0};
  int winding_axis_ = 0;

  // rectangle bookkeeping (cross / cross_dagger)
  int span_axis_ = 0;
  int lo_[2] = {0, 0};     // unwrapped lattice corner indices
  int len_[2] = {0, 0};    // rectangle extent in cells
  std::size_t left_node_ = 0, right_node_ = 0;
  double slot_low_[2] = {0.0, 0.0}, slot_high_[2] = {0.0, 0.0};
  bool slot_limited_[2] = {false, false};

  // local coordinates for rectangle membership, or -1
  bool rect_local(std::size_t cell, int* la, int* lb) const;

  // circuit bookkeeping
  std::vector<std::int32_t> local_id_;
  std::vector<std::array<double, 2>> rel_;  // member coordinates relative to the center
};

}  // namespace detail
}  // namespace torusperc
