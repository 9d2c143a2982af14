#pragma once

#include <cmath>
#include <cstdint>

namespace corrmap {

// splitmix64 generator. Self-contained so streams are bit-reproducible across
// compilers and platforms, which std::uniform_real_distribution is not.
class Rng {
 public:
  explicit Rng(uint64_t seed = 0) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ull);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ull;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebull;
    return z ^ (z >> 31);
  }

  // Uniform in [0, 1).
  double uniform() {
    return (double)(next_u64() >> 11) * 0x1.0p-53;
  }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Uniform integer in [0, n); n > 0.
  uint64_t uniform_int(uint64_t n) { return next_u64() % n; }

  int uniform_int(int lo, int hi_inclusive) {
    return lo + (int)uniform_int((uint64_t)(hi_inclusive - lo + 1));
  }

  // Standard normal via Box-Muller.
  double normal() {
    double u1 = uniform();
    double u2 = uniform();
    if (u1 < 1e-300) u1 = 1e-300;
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
  }

  // Independent child stream; `salt` picks the stream.
  Rng fork(uint64_t salt) const {
    Rng r(state_ ^ (0x632be59bd9b4e019ull * (salt + 1)));
    r.next_u64();
    return r;
  }

 private:
  uint64_t state_;
};

// FNV-1a over arbitrary bytes; used for content-addressed caches.
inline uint64_t fnv1a64(const void* data, size_t n, uint64_t h = 0xcbf29ce484222325ull) {
  const unsigned char* p = (const unsigned char*)data;
  for (size_t i = 0; i < n; ++i) {
    h ^= p[i];
    h *= 0x100000001b3ull;
  }
  return h;
}

}  // namespace corrmap
