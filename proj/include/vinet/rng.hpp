#ifndef VINET_RNG_HPP
#define VINET_RNG_HPP

#include <cmath>
#include <cstdint>
#include <random>
#include <string_view>
#include <vector>

#include "vinet/errors.hpp"

namespace vinet {

inline std::uint64_t splitmix64(std::uint64_t& state) {
  state += 0x9E3779B97F4A7C15ULL;
  std::uint64_t z = state;
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

// Derive an independent stream seed from (master seed, stream name).  Every
// random draw in the library goes through one of these named streams, so a
// single --seed pins the whole pipeline.
inline std::uint64_t stream_seed(std::uint64_t seed, std::string_view stream) {
  std::uint64_t h = 0xCBF29CE484222325ULL;  // FNV-1a over the name
  for (unsigned char c : stream) {
    h ^= c;
    h *= 0x100000001B3ULL;
  }
  std::uint64_t state = seed ^ h;
  std::uint64_t mixed = splitmix64(state);
  mixed ^= splitmix64(state);
  return mixed;
}

// Deterministic generator with hand-rolled distributions so the byte-level
// output is pinned by the engine alone, not the standard library's
// distribution internals.
class Rng {
 public:
  Rng(std::uint64_t seed, std::string_view stream)
      : eng_(stream_seed(seed, stream)) {}

  std::uint64_t next_u64() { return eng_(); }

  // Uniform in [0, 1) with 53 mantissa bits.
  double uniform() { return static_cast<double>(eng_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Standard normal via Box-Muller, caching the paired draw.
  double normal() {
    if (has_cached_) {
      has_cached_ = false;
      return cached_;
    }
    double u1 = 0.0;
    do { u1 = uniform(); } while (u1 <= 0.0);
    double u2 = uniform();
    double r = std::sqrt(-2.0 * std::log(u1));
    cached_ = r * std::sin(2.0 * M_PI * u2);
    has_cached_ = true;
    return r * std::cos(2.0 * M_PI * u2);
  }

  // Inclusive bounds.
  int uniform_int(int lo, int hi) {
    if (hi < lo) throw ConfigError("uniform_int: empty range");
    std::uint64_t span = static_cast<std::uint64_t>(hi) - lo + 1;
    return lo + static_cast<int>(eng_() % span);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (int i = static_cast<int>(v.size()) - 1; i > 0; --i)
      std::swap(v[i], v[uniform_int(0, i)]);
  }

  // k distinct indices from {0..m-1}, returned sorted ascending so k == m is
  // the identity selection.
  std::vector<int> sample_without_replacement(int m, int k) {
    if (k < 0 || k > m) throw ConfigError("sample_without_replacement: k out of range");
    std::vector<int> pool(m);
    for (int i = 0; i < m; ++i) pool[i] = i;
    for (int i = 0; i < k; ++i) std::swap(pool[i], pool[uniform_int(i, m - 1)]);
    pool.resize(k);
    std::sort(pool.begin(), pool.end());
    return pool;
  }

 private:
  std::mt19937_64 eng_;
  double cached_ = 0.0;
  bool has_cached_ = false;
};

}  // namespace vinet

#endif  // VINET_RNG_HPP
