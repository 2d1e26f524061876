#pragma once

#include <cmath>
#include <cstdint>
#include <string_view>

namespace homfrac {

// Counter-based RNG. Every sample draws from a stream keyed by
// (seed, region, sample index), so results do not depend on how samples
// are scheduled across workers.

inline std::uint64_t mix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

inline std::uint64_t region_id(std::string_view label) {
  std::uint64_t h = 0xcbf29ce484222325ULL;  // FNV-1a
  for (char c : label) {
    h ^= static_cast<unsigned char>(c);
    h *= 0x100000001b3ULL;
  }
  return h;
}

class SampleRng {
 public:
  SampleRng(std::uint64_t seed, std::uint64_t region, std::uint64_t index)
      : state_(mix64(mix64(seed ^ mix64(region)) + index)) {}

  std::uint64_t next_u64() {
    counter_ += 0x9e3779b97f4a7c15ULL;
    return mix64(state_ ^ counter_);
  }

  /// Uniform in [0,1).
  double next_u01() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Uniform in [-1,1).
  double next_sym() { return 2.0 * next_u01() - 1.0; }

  /// Standard normal (Box-Muller, one value per call pair kept simple).
  double next_normal();

 private:
  std::uint64_t state_;
  std::uint64_t counter_ = 0;
};

inline double SampleRng::next_normal() {
  double u1 = next_u01();
  double u2 = next_u01();
  while (u1 <= 1e-300) u1 = next_u01();
  return std::sqrt(-2.0 * std::log(u1)) * std::cos(6.283185307179586 * u2);
}

}  // namespace homfrac
