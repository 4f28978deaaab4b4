#pragma once

#include <cstdint>

namespace mcal {

// splitmix64 step, used both as a generator state advance and as a seed mixer.
inline std::uint64_t splitmix64(std::uint64_t& state) {
  std::uint64_t z = (state += 0x9e3779b97f4a7c15ULL);
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

// Derives a stream-specific seed so per-class / per-rank / per-replication
// fits are order independent.
inline std::uint64_t mix_seed(std::uint64_t seed, std::uint64_t a, std::uint64_t b = 0) {
  std::uint64_t s = seed;
  std::uint64_t x = splitmix64(s);
  s ^= a * 0xff51afd7ed558ccdULL + 0x2545f4914f6cdd1dULL;
  x ^= splitmix64(s);
  s ^= b * 0xc4ceb9fe1a85ec53ULL + 0x9e3779b97f4a7c15ULL;
  x ^= splitmix64(s);
  return x;
}

// Deterministic RNG with a fixed bit-level mapping to doubles, so fitted
// models are reproducible across compilers.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64() { return splitmix64(state_); }

  // uniform on [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // integer in [0, n)
  std::uint64_t below(std::uint64_t n) { return next_u64() % n; }

  double gaussian();

 private:
  std::uint64_t state_;
};

}  // namespace mcal
