#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <random>
#include <vector>

namespace ofdmsense {

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9E3779B97F4A7C15ULL;
  x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9ULL;
  x = (x ^ (x >> 27)) * 0x94D049BB133111EBULL;
  return x ^ (x >> 31);
}

/// Counter-mode trial seed: any (cell, trial) pair can be seeded
/// independently of execution order, so worker scheduling cannot change
/// results.
inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t cell, std::uint64_t trial) {
  std::uint64_t h = splitmix64(master ^ 0x6A09E667F3BCC909ULL);
  h = splitmix64(h + 0xA0761D6478BD642FULL * (cell + 1));
  h = splitmix64(h + 0xE7037ED1A0B428DBULL * (trial + 1));
  return h;
}

/// mt19937_64 plus explicit distribution transforms. The std::*_distribution
/// mappings are implementation-defined, so they are pinned here by hand to
/// keep streams reproducible for a given seed.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : gen_(seed) {}

  std::uint64_t next() { return gen_(); }

  /// Uniform on [0, 1), 53-bit resolution.
  double uniform01() { return static_cast<double>(next() >> 11) * 0x1.0p-53; }

  /// Standard normal, Box-Muller with one cached draw.
  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    // u1 in (0, 1] so the log is finite
    double u1 = (static_cast<double>(next() >> 11) + 1.0) * 0x1.0p-53;
    double u2 = uniform01();
    double r = std::sqrt(-2.0 * std::log(u1));
    double t = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(t);
    has_spare_ = true;
    return r * std::cos(t);
  }

  /// Uniform integer in [0, n), bitmask rejection.
  int uniform_int(int n) {
    if (n <= 1) return 0;
    std::uint64_t range = static_cast<std::uint64_t>(n);
    std::uint64_t mask = ~0ULL >> __builtin_clzll(range - 1 ? range - 1 : 1);
    for (;;) {
      std::uint64_t v = next() & mask;
      if (v < range) return static_cast<int>(v);
    }
  }

  /// Uniform k-subset of {0, .., n-1} (Floyd's method), sorted.
  std::vector<int> sample_indices(int n, int k) {
    std::vector<int> out;
    out.reserve(k);
    for (int j = n - k; j < n; ++j) {
      int t = uniform_int(j + 1);
      bool present = false;
      for (int v : out)
        if (v == t) { present = true; break; }
      if (present)
        out.push_back(j);
      else
        out.push_back(t);
    }
    std::sort(out.begin(), out.end());
    return out;
  }

 private:
  std::mt19937_64 gen_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace ofdmsense
