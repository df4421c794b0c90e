#pragma once

#include <array>
#include <vector>

#include "torusperc/sampler.hpp"

namespace torusperc {

enum class DualityKind { colinear, positive_surjective, negative_surjective, indeterminate };

struct DualityCase {
  DualityKind kind = DualityKind::indeterminate;
  // distinct nonzero cycle classes of {f > 0} components (primal connectivity)
  std::vector<std::array<int, 3>> pos_classes;
  // same for {f < 0} under the matched dual connectivity
  std::vector<std::array<int, 3>> neg_classes;
  // n1*m2 - n2*m1 = 0 for every pos/neg pair (disjoint curves cannot cross)
  bool orthogonal = false;
  // the sample landed in exactly one trichotomy case; false marks a
  // classification failure to be surfaced, never coerced
  bool ok = false;
};

// Winding trichotomy of the positive and negative phases on the 2-torus:
// either all windings are parallel, or one phase winds in both directions
// while the other winds in none.
DualityCase duality_classify(const FieldSample& f, int pos_connectivity = 4,
                             int neg_connectivity = 8);

}  // namespace torusperc
