#pragma once

#include <cstdint>

namespace torusperc {

// Counter-based random numbers: every draw is a pure function of
// (master seed, purpose tag, stream, counter). Monte Carlo loops key the
// stream by sample index and the counter by cell index, so results do not
// depend on draw order or thread count. The mixer is the 64-bit finalizer
// from splitmix64, chained over the key words with golden-ratio offsets.
namespace rng {

inline std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
  return z ^ (z >> 31);
}

inline std::uint64_t key_hash(std::uint64_t seed, std::uint64_t purpose, std::uint64_t stream,
                              std::uint64_t counter) {
  constexpr std::uint64_t golden = 0x9e3779b97f4a7c15ull;
  std::uint64_t h = mix64(seed + golden);
  h = mix64((h ^ purpose) + golden);
  h = mix64((h ^ stream) + golden);
  h = mix64((h ^ counter) + golden);
  return h;
}

// uniform in the open interval (0,1), 52 significant bits; the half-step
// offset is exactly representable at this width, so the endpoints stay out
inline double uniform01(std::uint64_t bits) {
  return (static_cast<double>(bits >> 12) + 0.5) * 0x1p-52;
}

// one standard normal per key, Box-Muller cosine branch (the sine partner is
// discarded; one key, one value keeps the counter contract trivial)
double normal(std::uint64_t seed, std::uint64_t purpose, std::uint64_t stream, std::uint64_t counter);

// purpose tags; keep values stable, they are part of the reproducibility contract
enum Purpose : std::uint64_t {
  kWhiteNoise = 1,
  kSpectral = 2,
  kPerturbation = 3,
  kRefinement = 4,
  kDeriveSeed = 5,
};

// per-sample seed for Monte Carlo loops, stable under parallel scheduling
inline std::uint64_t derive_seed(std::uint64_t master_seed, std::uint64_t sample_index) {
  return key_hash(master_seed, kDeriveSeed, sample_index, 0);
}

}  // namespace rng
}  // namespace torusperc
