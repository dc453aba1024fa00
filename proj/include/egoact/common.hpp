// Shared utilities: deterministic RNG, coordinate quantization, checks.
#pragma once

#include <bit>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <string>

namespace egoact {

static_assert(std::endian::native == std::endian::little,
              "file formats assume a little-endian host");

inline void require(bool ok, const std::string& msg) {
  if (!ok) throw std::invalid_argument(msg);
}

inline void require_io(bool ok, const std::string& msg) {
  if (!ok) throw std::runtime_error(msg);
}

// Deterministic RNG. Distribution code is written out here instead of using
// <random> adaptors so that generated streams are identical for any stdlib.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(splitmix(seed)) {}

  std::uint64_t next_u64() {
    // xorshift* over a splitmix-initialized state
    std::uint64_t x = state_;
    x ^= x >> 12;
    x ^= x << 25;
    x ^= x >> 27;
    state_ = x;
    return x * 0x2545F4914F6CDD1DULL;
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // uniform integer in [0, n)
  std::uint64_t bounded(std::uint64_t n) {
    require(n > 0, "Rng::bounded: n must be positive");
    std::uint64_t threshold = (0 - n) % n;  // rejection sampling, no modulo bias
    for (;;) {
      std::uint64_t r = next_u64();
      if (r >= threshold) return r % n;
    }
  }

  int int_in(int lo, int hi) {  // inclusive range
    require(hi >= lo, "Rng::int_in: empty range");
    return lo + static_cast<int>(bounded(static_cast<std::uint64_t>(hi - lo) + 1));
  }

  // standard normal via Box-Muller (one value per call; cached pair unused to
  // keep the stream position independent of call parity)
  double normal() {
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    double u2 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  double normal(double mean, double sigma) { return mean + sigma * normal(); }

  bool coin(double p) { return uniform() < p; }

 private:
  static std::uint64_t splitmix(std::uint64_t x) {
    x += 0x9E3779B97F4A7C15ULL;
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
    x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
    x = x ^ (x >> 31);
    if (x == 0) x = 0x9E3779B97F4A7C15ULL;
    return x;
  }

  std::uint64_t state_;
};

// Scene coordinates are snapped to a 2^-32 grid. On that grid 1 - x is exact
// in double arithmetic, which makes horizontal mirroring an exact involution.
inline double quantize_coord(double x) {
  return std::nearbyint(x * 4294967296.0) * 0x1.0p-32;
}

// FNV-1a, used for config hashes embedded in checkpoint headers.
inline std::uint64_t fnv1a(const std::string& s) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char c : s) {
    h ^= c;
    h *= 1099511628211ULL;
  }
  return h;
}

}  // namespace egoact
