#pragma once

#include <cstdint>
#include <random>

namespace antithetic {

// splitmix64 finalizer; used to derive decorrelated child seeds.
inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Seeded random stream. Every randomized operation takes one of these, so a
// single 64-bit seed pins down all outputs byte for byte. Draws are mapped
// from raw mt19937_64 words; std::uniform_*_distribution is avoided because
// its output sequence is not pinned down by the standard.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : seed_(seed), engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform double in [lo, hi).
  double uniform(double lo = 0.0, double hi = 1.0) {
    const double u01 = static_cast<double>(next_u64() >> 11) * 0x1.0p-53;
    return lo + u01 * (hi - lo);
  }

  /// Uniform integer in [lo, hi], both ends inclusive. Requires lo <= hi.
  std::int64_t uniform_int(std::int64_t lo, std::int64_t hi) {
    const std::uint64_t span =
        static_cast<std::uint64_t>(hi) - static_cast<std::uint64_t>(lo) + 1;
    if (span == 0) return static_cast<std::int64_t>(next_u64());
    const std::uint64_t reject_from = UINT64_MAX - UINT64_MAX % span;
    std::uint64_t x = next_u64();
    while (x >= reject_from) x = next_u64();
    return lo + static_cast<std::int64_t>(x % span);
  }

  bool bernoulli(double p) { return uniform() < p; }

  /// Child stream `n`, decorrelated from this stream and from other children.
  Rng fork(std::uint64_t n) const { return Rng(splitmix64(splitmix64(seed_) + n)); }

  std::uint64_t seed() const { return seed_; }

 private:
  std::uint64_t seed_;
  std::mt19937_64 engine_;
};

}  // namespace antithetic
