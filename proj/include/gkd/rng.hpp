// Copyright 2026 The GKD Authors
// SPDX-License-Identifier: Apache-2.0

#ifndef GKD_RNG_HPP_
#define GKD_RNG_HPP_

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <numbers>
#include <random>
#include <utility>
#include <vector>

namespace gkd {

// Mixes a base seed with a sequence of stream tags (splitmix64 finalizer).
// Every random stream in the engine is derived from the run seed this way so
// that independent consumers never perturb each other's draws.
inline std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> parts) {
  auto mix = [](std::uint64_t z) {
    z += 0x9e3779b97f4a7c15ULL;
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  };
  std::uint64_t h = mix(base);
  for (std::uint64_t p : parts) h = mix(h ^ mix(p));
  return h;
}

// Named stream tags.
namespace stream {
inline constexpr std::uint64_t kSplit = 0x5350;
inline constexpr std::uint64_t kSynth = 0x5359;
inline constexpr std::uint64_t kStudentInit = 0x5354;
inline constexpr std::uint64_t kTeacherInit = 0x5445;
inline constexpr std::uint64_t kClassifierInit = 0x434c;
inline constexpr std::uint64_t kBatches = 0x4241;
inline constexpr std::uint64_t kNegatives = 0x4e45;
inline constexpr std::uint64_t kDropout = 0x4452;
inline constexpr std::uint64_t kMockTeacher = 0x4d4f;
inline constexpr std::uint64_t kPrompts = 0x5052;
}  // namespace stream

// std::mt19937_64 is bit-specified by the standard; the distributions are
// not, so the bounded/real/normal draws are done here to keep outputs
// identical across standard libraries.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }

  // Uniform in [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  double uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

  // Unbiased integer in [0, n), n > 0.
  std::uint64_t index(std::uint64_t n) {
    const std::uint64_t limit = std::numeric_limits<std::uint64_t>::max() -
                                std::numeric_limits<std::uint64_t>::max() % n;
    std::uint64_t x = engine_();
    while (x >= limit) x = engine_();
    return x % n;
  }

  double normal() {
    if (has_spare_) {
      has_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 2.0 * std::numbers::pi * u2;
    spare_ = r * std::sin(a);
    has_spare_ = true;
    return r * std::cos(a);
  }

  template <class T>
  void shuffle(std::vector<T>& v) {
    for (std::size_t i = v.size(); i > 1; --i) {
      std::size_t j = static_cast<std::size_t>(index(i));
      std::swap(v[i - 1], v[j]);
    }
  }

 private:
  std::mt19937_64 engine_;
  double spare_ = 0.0;
  bool has_spare_ = false;
};

}  // namespace gkd

#endif  // GKD_RNG_HPP_
