#include "torusperc/rng.hpp"

#include <cmath>
#include <numbers>

namespace torusperc::rng {

double normal(std::uint64_t seed, std::uint64_t purpose, std::uint64_t stream,
              std::uint64_t counter) {
  double u1 = uniform01(key_hash(seed, purpose, stream, 2 * counter));
  double u2 = uniform01(key_hash(seed, purpose, stream, 2 * counter + 1));
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * std::numbers::pi * u2);
}

}  // namespace torusperc::rng
