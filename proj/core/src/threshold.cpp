#include "torusperc/threshold.hpp"

#include <algorithm>
#include <limits>
#include <numeric>

#include "torusperc/digest.hpp"
#include "torusperc/errors.hpp"

#include "event_tracker.hpp"

namespace torusperc {

ThresholdResult threshold_sweep(const FieldSample& f, const EventSpec& e, int connectivity) {
  const std::vector<double>& v = f.values;
  std::vector<std::uint32_t> order(v.size());
  std::iota(order.begin(), order.end(), 0u);
  std::sort(order.begin(), order.end(), [&v](std::uint32_t a, std::uint32_t b) {
    if (v[a] != v[b]) return v[a] > v[b];
    return a < b;
  });

  detail::EventTracker tracker(f.grid, e, connectivity);
  Digest digest;
  ThresholdResult r;
  for (std::uint32_t cell : order) {
    if (!tracker.member(cell)) continue;
    digest.u64(cell);
    if (tracker.insert(cell)) {
      double value = v[cell] + f.level_offset;
      r.realized = true;
      r.t_value = -value;
      r.merge_level = value;
      r.saddle_cell = f.grid.coords(cell);
      r.realizing_class = tracker.realizing_class();
      digest.f64(value);
      r.sweep_order_digest = digest.value();
      return r;
    }
  }
  r.t_value = std::numeric_limits<double>::infinity();
  r.merge_level = -std::numeric_limits<double>::infinity();
  r.sweep_order_digest = digest.value();
  return r;
}

std::vector<SaddleDerivativeRow> saddle_derivative_check(const FieldSample& f, const EventSpec& e,
                                                         const FieldSample& v,
                                                         const std::vector<double>& t_list,
                                                         int connectivity) {
  if (!f.grid.same_shape(v.grid))
    throw Error("grid-mismatch", "perturbation grid differs from the sample grid");
  ThresholdResult base = threshold_sweep(f, e, connectivity);
  if (!base.realized) throw Error("geometry-out-of-bounds", "event never realizes on this sample");
  double at_saddle = v.values[f.grid.index(base.saddle_cell)] + v.level_offset;
  std::vector<SaddleDerivativeRow> rows;
  FieldSample perturbed = f;
  for (double t : t_list) {
    if (t == 0.0) throw Error("config-invalid", "difference quotient needs t != 0");
    for (std::size_t i = 0; i < f.values.size(); ++i)
      perturbed.values[i] = f.values[i] + t * (v.values[i] + v.level_offset);
    ThresholdResult shifted = threshold_sweep(perturbed, e, connectivity);
    SaddleDerivativeRow row;
    row.t = t;
    row.quotient = (base.t_value - shifted.t_value) / t;
    row.predicted = at_saddle;
    rows.push_back(row);
  }
  return rows;
}

}  // namespace torusperc
