#pragma once

#include <cstdint>
#include <initializer_list>

#include "mabeam/types.hpp"

namespace mabeam {

// xoshiro256++ with splitmix64 seeding. Distributions are implemented here
// rather than taken from <random> so that draws are bit-identical across
// platforms and standard library versions.
class Rng {
 public:
  explicit Rng(uint64_t seed) {
    uint64_t x = seed;
    for (auto& si : s_) si = splitmix64(x);
  }

  uint64_t next_u64() {
    const uint64_t result = rotl(s_[0] + s_[3], 23) + s_[0];
    const uint64_t t = s_[1] << 17;
    s_[2] ^= s_[0];
    s_[3] ^= s_[1];
    s_[1] ^= s_[2];
    s_[0] ^= s_[3];
    s_[2] ^= t;
    s_[3] = rotl(s_[3], 45);
    return result;
  }

  // uniform in [0, 1)
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  uint64_t uniform_index(uint64_t n) { return next_u64() % n; }

  // standard normal via Box-Muller
  double gaussian() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    spare_ = r * std::sin(2.0 * kPi * u2);
    have_spare_ = true;
    return r * std::cos(2.0 * kPi * u2);
  }

  // circularly-symmetric complex normal with E|z|^2 = 1
  Cx cgaussian() {
    const double re = gaussian();
    const double im = gaussian();
    return Cx(re * M_SQRT1_2, im * M_SQRT1_2);
  }

  static uint64_t splitmix64(uint64_t& x) {
    uint64_t z = (x += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static uint64_t rotl(uint64_t x, int k) { return (x << k) | (x >> (64 - k)); }

  uint64_t s_[4];
  bool have_spare_ = false;
  double spare_ = 0.0;
};

// Derives an independent substream seed from a tuple of ids by hash chaining.
// Used by the experiment harness so that records are reproducible regardless
// of execution order.
inline uint64_t derive_seed(std::initializer_list<uint64_t> ids) {
  uint64_t h = 0x6d616265616d0101ULL;
  for (uint64_t id : ids) {
    h ^= id + 0x9e3779b97f4a7c15ULL + (h << 6) + (h >> 2);
    h = Rng::splitmix64(h);
  }
  return h;
}

}  // namespace mabeam
