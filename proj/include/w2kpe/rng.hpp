#pragma once

#include <cstdint>
#include <random>
#include <string_view>

namespace w2kpe {

// Derives a stage seed from the root seed and a fixed label, so every source
// of randomness in a run flows from one root seed. FNV-1a over the label
// mixed with the root via splitmix64 finalization; stable across platforms.
std::uint64_t derive_seed(std::uint64_t root, std::string_view label);

// Uniform double in [0, 1) from the top 53 bits of the generator output.
// std::uniform_real_distribution is implementation-defined; this is not.
inline double uniform01(std::mt19937_64& gen) {
  return static_cast<double>(gen() >> 11) * 0x1.0p-53;
}

// Uniform double in [-bound, bound).
inline double uniform_symmetric(std::mt19937_64& gen, double bound) {
  return (2.0 * uniform01(gen) - 1.0) * bound;
}

// Uniform integer in [0, n). n must be >= 1.
inline std::size_t uniform_index(std::mt19937_64& gen, std::size_t n) {
  return static_cast<std::size_t>(uniform01(gen) * static_cast<double>(n)) % n;
}

}  // namespace w2kpe
