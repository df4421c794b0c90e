#pragma once

#include <array>
#include <string>

#include "torusperc/sampler.hpp"

namespace torusperc {

enum class EventKind { loop, cross, cross_dagger, circuit };

struct Placement {
  // cross/cross_dagger: lower corner of the rectangle; circuit: annulus center
  std::array<double, 3> translation{0.0, 0.0, 0.0};
  // quarter turns; for loop events this selects the winding axis
  int rotation_quarter = 0;
};

struct EventSpec {
  EventKind kind = EventKind::loop;
  double R = 1.0;  // scale: cross spans 6R x 4R, cross_dagger 3R x 4R
  Placement placement;
  // circuit annulus radii, r1 <= r2 < side/2
  double r1 = 0.0;
  double r2 = 0.0;
  // cross_dagger boundary slots: when >= 0, the terminal on that side attaches
  // only to boundary cells inside slot window [slot*4R/slots, (slot+1)*4R/slots)
  // measured along the short side. -1 opens the whole side.
  int slot_left = -1;
  int slot_right = -1;
  int slots_per_side = 12;
};

EventSpec loop_event(int axis = 0);
EventSpec cross_event(double R, const std::array<double, 3>& corner = {0.0, 0.0, 0.0},
                      int rotation_quarter = 0);
EventSpec dagger_event(double R, const std::array<double, 3>& corner = {0.0, 0.0, 0.0},
                       int rotation_quarter = 0);
EventSpec circuit_event(const std::array<double, 3>& center, double r1, double r2);

std::string event_name(EventKind kind);

struct EventDetail {
  bool realized = false;
  std::array<int, 3> realizing_class{0, 0, 0};  // zero for terminal-linking events
  std::size_t n_open = 0;                       // open member cells examined
};

// True iff {f + level_offset + level > 0}, viewed as open cells under the given
// site connectivity (4 or 8 in d=2; mapped to face / full neighborhoods in
// d=3), realizes the event.
bool evaluate_event(const FieldSample& f, double level, const EventSpec& spec,
                    int connectivity = 4);

EventDetail evaluate_event_detail(const FieldSample& f, double level, const EventSpec& spec,
                                  int connectivity = 4);

}  // namespace torusperc
