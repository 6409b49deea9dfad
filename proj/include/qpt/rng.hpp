#pragma once

#include <cstdint>

#include "qpt/real.hpp"

namespace qpt {

// Deterministic counter-based generator (splitmix64 over seed||counter).
// Identical seeds give identical streams on every platform; no global state.
class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(seed) {}

  std::uint64_t next_u64() {
    std::uint64_t z = seed_ + 0x9e3779b97f4a7c15ull * ++counter_;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0,1) with 64 significant bits.
  Real uniform01() {
    return Real(next_u64()) / Real("18446744073709551616");
  }

  Real uniform(const Real& lo, const Real& hi) {
    return lo + (hi - lo) * uniform01();
  }

  long uniform_int(long lo, long hi) {  // inclusive bounds
    return lo + static_cast<long>(next_u64() % static_cast<std::uint64_t>(hi - lo + 1));
  }

 private:
  std::uint64_t seed_;
  std::uint64_t counter_ = 0;
};

}  // namespace qpt
