#pragma once

#include <cstdint>

namespace jbf {

// Counter-based generator: every draw is a pure function of (seed, stream,
// index), so sampling is reproducible and order-independent.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

class Sampler {
 public:
  explicit Sampler(std::uint64_t seed) : seed_(seed) {}

  // Uniform double in [0, 1).
  double uniform(std::uint64_t stream, std::uint64_t index) const {
    std::uint64_t h = splitmix64(seed_ ^ splitmix64(stream ^ 0x243f6a8885a308d3ULL));
    h = splitmix64(h ^ index);
    return static_cast<double>(h >> 11) * 0x1.0p-53;
  }

  double uniform(std::uint64_t stream, std::uint64_t index, double lo, double hi) const {
    return lo + (hi - lo) * uniform(stream, index);
  }

 private:
  std::uint64_t seed_;
};

}  // namespace jbf
