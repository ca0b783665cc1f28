#pragma once

#include <cstdint>
#include <initializer_list>

namespace plantres {

// Stateless counter-based generator: every draw is a pure function of
// (seed, key...). Draw order never matters, so parallel work stays
// reproducible.
inline std::uint64_t splitmix64(std::uint64_t z) {
  z += 0x9E3779B97F4A7C15ULL;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

class CounterRng {
 public:
  explicit CounterRng(std::uint64_t seed) : seed_(splitmix64(seed)) {}

  std::uint64_t bits(std::initializer_list<std::uint64_t> key) const {
    std::uint64_t h = seed_;
    for (std::uint64_t k : key) h = splitmix64(h ^ splitmix64(k + 0x632BE59BD9B4E019ULL));
    return h;
  }

  /// Uniform in [0, 1) with 53 random bits.
  double uniform(std::initializer_list<std::uint64_t> key) const {
    return static_cast<double>(bits(key) >> 11) * 0x1.0p-53;
  }

  double uniform(std::initializer_list<std::uint64_t> key, double lo, double hi) const {
    return lo + (hi - lo) * uniform(key);
  }

 private:
  std::uint64_t seed_;
};

}  // namespace plantres
