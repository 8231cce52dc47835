#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

namespace expeval {

/// Deterministic random source. Uses splitmix64 internally so that streams
/// are identical across standard libraries and platforms (std distributions
/// are implementation-defined and would break reproducibility of saved runs).
class Rng {
 public:
  explicit Rng(uint64_t seed) : state_(seed) {}

  uint64_t next_u64() {
    uint64_t z = (state_ += 0x9e3779b97f4a7c15ULL);
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

  /// Uniform in [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  /// Uniform integer in [0, n).
  int uniform_int(int n) { return static_cast<int>(next_u64() % static_cast<uint64_t>(n)); }

  /// Standard normal via Box-Muller (two uniforms per draw, no caching).
  double gaussian() {
    double u1 = uniform();
    double u2 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586476925286766559 * u2);
  }

  template <typename T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i) {
      int j = uniform_int(i + 1);
      std::swap(v[static_cast<size_t>(i)], v[static_cast<size_t>(j)]);
    }
  }

  /// Derives an independent sub-stream seed from (seed, index).
  static uint64_t derive(uint64_t seed, uint64_t index) {
    Rng r(seed ^ (0x632be59bd9b4e019ULL + index * 0x100000001b3ULL));
    return r.next_u64();
  }

 private:
  uint64_t state_;
};

}  // namespace expeval
