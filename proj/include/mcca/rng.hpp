#pragma once

#include <cmath>
#include <cstdint>
#include <vector>

#include "mcca/error.hpp"

namespace mcca {

// Counter-based generator with an explicit, documented state transition:
//
//   key     = mix(mix(seed) ^ mix(stream · 0x9E3779B97F4A7C15 + 1))
//   word(i) = mix(key + i · 0x9E3779B97F4A7C15)        i = 0, 1, 2, …
//
// where mix is the 64-bit splitmix finalizer. Each (seed, stream) pair names
// an independent sequence, so parallel replications get disjoint streams and
// results never depend on scheduling. Uniform doubles use the top 53 bits
// only — no libm calls — so sequences are bit-identical across platforms.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::uint64_t stream = 0)
      : key_(mix(mix(seed) ^ mix(stream * 0x9E3779B97F4A7C15ULL + 1ULL))),
        counter_(0) {}

  static std::uint64_t mix(std::uint64_t z) {
    z += 0x9E3779B97F4A7C15ULL;
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
    return z ^ (z >> 31);
  }

  std::uint64_t next_u64() { return mix(key_ + (counter_++) * 0x9E3779B97F4A7C15ULL); }

  // Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  // Uniform integer in [0, bound). The floor-of-scaled-double construction is
  // part of the documented contract; its bias is < 2^-53·bound and it keeps
  // index draws free of platform-dependent arithmetic.
  std::size_t next_below(std::size_t bound) {
    return std::min<std::size_t>(static_cast<std::size_t>(uniform() * static_cast<double>(bound)),
                                 bound - 1);
  }

  // Standard normal via Box–Muller; consumes exactly two uniforms per pair.
  double normal() {
    if (have_spare_) {
      have_spare_ = false;
      return spare_;
    }
    double u1 = uniform();
    while (u1 <= 0.0) u1 = uniform();
    const double u2 = uniform();
    const double r = std::sqrt(-2.0 * std::log(u1));
    const double a = 6.283185307179586476925286766559 * u2;
    spare_ = r * std::sin(a);
    have_spare_ = true;
    return r * std::cos(a);
  }

  // First m distinct indices of a seeded partial Fisher–Yates shuffle of
  // 0..n-1: a without-replacement sample.
  std::vector<std::size_t> sample_without_replacement(std::size_t n, std::size_t m) {
    if (m > n) fail(ErrorCode::InvalidValue, "sample size exceeds population");
    std::vector<std::size_t> idx(n);
    for (std::size_t i = 0; i < n; ++i) idx[i] = i;
    for (std::size_t i = 0; i < m; ++i) {
      const std::size_t j = i + next_below(n - i);
      std::swap(idx[i], idx[j]);
    }
    idx.resize(m);
    return idx;
  }

 private:
  std::uint64_t key_;
  std::uint64_t counter_;
  bool have_spare_ = false;
  double spare_ = 0.0;
};

}  // namespace mcca
