#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>
#include <limits>

namespace poocox {

/// Counter-based SplitMix64: the i-th output is mix(key + i * golden).
/// `split` derives an independent child key from (key, stream) without
/// consuming output, so substreams do not depend on draw order.
class Rng {
 public:
  using result_type = std::uint64_t;

  explicit constexpr Rng(std::uint64_t key) noexcept : key_(key) {}

  static constexpr result_type min() noexcept { return 0; }
  static constexpr result_type max() noexcept { return std::numeric_limits<result_type>::max(); }

  result_type operator()() noexcept { return mix(key_ + (++counter_) * kGolden); }

  constexpr Rng split(std::uint64_t stream) const noexcept { return Rng(mix(key_ ^ mix(stream * kGolden + kSplitSalt))); }
  constexpr Rng split(std::initializer_list<std::uint64_t> path) const noexcept {
    Rng r = *this;
    for (auto s : path) r = r.split(s);
    return r;
  }

  constexpr std::uint64_t key() const noexcept { return key_; }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() noexcept { return static_cast<double>((*this)() >> 11) * 0x1.0p-53; }
  double uniform(double lo, double hi) noexcept { return lo + (hi - lo) * uniform(); }
  double exponential() noexcept { return -std::log1p(-uniform()); }
  bool bernoulli(double p) noexcept { return uniform() < p; }

  /// Uniform integer in [0, n), rejection sampled.
  std::uint64_t below(std::uint64_t n) noexcept {
    const std::uint64_t limit = max() - max() % n;
    std::uint64_t x;
    do x = (*this)();
    while (x >= limit);
    return x % n;
  }

  static constexpr std::uint64_t mix(std::uint64_t z) noexcept {
    z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
    z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
    return z ^ (z >> 31);
  }

 private:
  static constexpr std::uint64_t kGolden = 0x9e3779b97f4a7c15ULL;
  static constexpr std::uint64_t kSplitSalt = 0x632be59bd9b4e019ULL;

  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

/// Stream tags used across the project.
namespace streams {
inline constexpr std::uint64_t kEmInit = 1;
inline constexpr std::uint64_t kTruth = 2;
inline constexpr std::uint64_t kMask = 3;
inline constexpr std::uint64_t kBootstrap = 4;
inline constexpr std::uint64_t kStudy = 5;
}  // namespace streams

}  // namespace poocox
