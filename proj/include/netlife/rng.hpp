#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace netlife {

// Deterministic RNG utilities. All randomness in the project flows through
// Stream so that results are bit-reproducible for a fixed seed across
// platforms: mt19937_64 is fully specified by the standard, and we roll our
// own uniform/poisson draws because std::*_distribution is
// implementation-defined.

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

// Derives an independent stream seed from (seed, a, b, c). Used to split a
// master seed into sub-streams (topology, sources, per-episode realizations)
// that can be re-created independently of draw order elsewhere.
inline std::uint64_t derive_seed(std::uint64_t seed, std::uint64_t a,
                                 std::uint64_t b = 0, std::uint64_t c = 0) {
  std::uint64_t h = splitmix64(seed ^ 0x6a09e667f3bcc908ULL);
  h = splitmix64(h ^ splitmix64(a));
  h = splitmix64(h ^ splitmix64(b));
  h = splitmix64(h ^ splitmix64(c));
  return h;
}

class Stream {
 public:
  explicit Stream(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() {
    return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Integer in [0, n).
  std::uint64_t below(std::uint64_t n) {
    // Modulo bias is irrelevant at our n (<< 2^64) but keep rejection anyway.
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t v;
    do {
      v = engine_();
    } while (v >= limit);
    return v % n;
  }

  // Knuth's product method; our means are O(1) so this is fine.
  long poisson(double mean) {
    if (mean <= 0.0) return 0;
    const double limit = std::exp(-mean);
    long k = 0;
    double p = 1.0;
    do {
      ++k;
      p *= uniform();
    } while (p > limit);
    return k - 1;
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace netlife
