#pragma once

#include <cmath>
#include <cstdint>
#include <random>

namespace simix {

// Seed splitting rule: every concurrent task draws from its own mt19937_64
// seeded by derive_seed(master, stream, index). `stream` tags the consumer
// (replication runner, CV, restarts, ...) so that unrelated loops sharing a
// master seed never collide. The mix is splitmix64 applied to the three
// words in sequence, which is stable across platforms.
namespace seed_stream {
inline constexpr std::uint64_t replication = 0x01;
inline constexpr std::uint64_t generator = 0x02;
inline constexpr std::uint64_t cv_repeat = 0x03;
inline constexpr std::uint64_t restart = 0x04;
inline constexpr std::uint64_t mixlinreg = 0x05;
inline constexpr std::uint64_t mccv = 0x06;
inline constexpr std::uint64_t estimator = 0x07;
}  // namespace seed_stream

inline std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t derive_seed(std::uint64_t master, std::uint64_t stream,
                                 std::uint64_t index) {
  std::uint64_t s = splitmix64(master);
  s = splitmix64(s ^ stream);
  s = splitmix64(s ^ index);
  return s;
}

// mt19937_64 is bit-specified by the standard; combined with the explicit
// samplers below, generated datasets are reproducible across toolchains
// (std::*_distribution would not be).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // uniform on [0,1), 53-bit resolution
  double uniform01() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform01(); }

  // standard normal via Marsaglia polar method
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u, v, s;
    do {
      u = 2.0 * uniform01() - 1.0;
      v = 2.0 * uniform01() - 1.0;
      s = u * u + v * v;
    } while (s >= 1.0 || s == 0.0);
    const double f = std::sqrt(-2.0 * std::log(s) / s);
    spare_ = v * f;
    have_spare_ = true;
    return u * f;
  }

  double normal(double mean, double sd) { return mean + sd * normal(); }

  // uniform integer in [0, n)
  std::uint64_t below(std::uint64_t n) {
    // rejection to avoid modulo bias
    const std::uint64_t limit = UINT64_MAX - UINT64_MAX % n;
    std::uint64_t x;
    do {
      x = engine_();
    } while (x >= limit);
    return x % n;
  }

  template <class It>
  void shuffle(It first, It last) {
    const auto n = static_cast<std::uint64_t>(last - first);
    for (std::uint64_t i = n; i > 1; --i) {
      std::swap(first[i - 1], first[below(i)]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool have_spare_ = false;
};

}  // namespace simix
