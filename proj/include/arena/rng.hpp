#pragma once

#include <cstdint>
#include <random>

namespace arena {

// splitmix64 step; used to expand seeds and derive stream keys.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ull;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ull;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebull;
  return x ^ (x >> 31);
}

// Order-sensitive seed combine: mix(a,b) != mix(b,a).
inline std::uint64_t mix_seed(std::uint64_t a, std::uint64_t b) {
  return splitmix64(splitmix64(a) ^ (b + 0x632be59bd9b4e019ull));
}

// One deterministic random stream. Every sampling site gets its own
// pre-assigned stream so parallel and serial execution draw identical
// values. Distributions are hand-rolled: the std:: distribution objects
// are not bit-stable across library implementations.
class RngStream {
 public:
  explicit RngStream(std::uint64_t seed) : gen_(splitmix64(seed)) {}

  std::uint64_t next_u64() { return gen_(); }

  // Uniform in [0, 1) with 53 random bits.
  double next_double() { return static_cast<double>(gen_() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, n), rejection sampled (n >= 1).
  std::size_t next_index(std::size_t n) {
    const std::uint64_t span = n;
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t v = gen_();
    while (v >= limit) v = gen_();
    return static_cast<std::size_t>(v % span);
  }

  // Symmetric uniform in [-s, s].
  double next_symmetric(double s) { return s * (2.0 * next_double() - 1.0); }

 private:
  std::mt19937_64 gen_;
};

}  // namespace arena
