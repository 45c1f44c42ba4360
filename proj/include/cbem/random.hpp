#pragma once

#include <cstdint>
#include <random>

namespace cbem {

// Every random stream in the library is std::mt19937_64 (whose output
// sequence is fixed by the standard) plus the conversions below. The
// <random> distribution classes are avoided because their algorithms are
// implementation-defined, so the same seed would give different datasets on
// different standard libraries.

/// SplitMix64 finalizer (Steele, Lea & Flood 2014).
constexpr std::uint64_t splitmix64(std::uint64_t x) noexcept {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-based child seed: splitmix64(parent ^ splitmix64(index)).
/// Depends only on (parent, index), never on the order children are drawn.
constexpr std::uint64_t derive_seed(std::uint64_t parent,
                                    std::uint64_t index) noexcept {
  return splitmix64(parent ^ splitmix64(index));
}

class Rng {
public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  std::uint64_t next() noexcept { return engine_(); }

private:
  std::mt19937_64 engine_;
};

} // namespace cbem
