#pragma once

#include <cstdint>

// Counter-based random numbers: draw k of stream `seed` is a pure function
// of (seed, k). Simulations index draws by trial and slot, so any contiguous
// block of trials can be computed independently (and in any order) while
// reproducing the exact sequence a single-threaded run would see.

namespace secretballot {

/// SplitMix64 output function: a bijective 64-bit finalizer with good
/// avalanche behaviour.
inline std::uint64_t mix64(std::uint64_t z) {
  z ^= z >> 30;
  z *= 0xBF58476D1CE4E5B9ull;
  z ^= z >> 27;
  z *= 0x94D049BB133111EBull;
  z ^= z >> 31;
  return z;
}

/// Draw `index` of stream `seed`, uniform on the open interval (0, 1).
/// The offset keeps draws strictly inside the interval so quantile
/// transforms never see 0 or 1.
inline double uniform_draw(std::uint64_t seed, std::uint64_t index) {
  const std::uint64_t word =
      mix64(seed + (index + 1) * 0x9E3779B97F4A7C15ull);
  return (static_cast<double>(word >> 11) + 0.5) * 0x1.0p-53;
}

}  // namespace secretballot
