#pragma once

#include <cmath>
#include <cstdint>
#include <initializer_list>

namespace druin {

/// SplitMix64 finalizer.
constexpr std::uint64_t mix64(std::uint64_t z) {
  z += 0x9e3779b97f4a7c15ULL;
  z = (z ^ (z >> 30)) * 0xbf58476d1ce4e5b9ULL;
  z = (z ^ (z >> 27)) * 0x94d049bb133111ebULL;
  return z ^ (z >> 31);
}

/// Counter-based stream: the i-th output is a pure function of (key, i), and
/// the key is a pure function of (seed, stream ids). Draws for one
/// replication therefore never depend on how replications are scheduled.
class CounterRng {
 public:
  CounterRng(std::uint64_t seed, std::initializer_list<std::uint64_t> stream) : key_(mix64(seed)) {
    for (std::uint64_t s : stream) key_ = mix64(key_ ^ mix64(s + 0x632be59bd9b4e019ULL));
  }

  std::uint64_t next_u64() { return mix64(key_ + 0x9e3779b97f4a7c15ULL * ++counter_); }

  /// Uniform on (0, 1].
  double uniform_pos() { return (static_cast<double>(next_u64() >> 11) + 1.0) * 0x1.0p-53; }

  /// Uniform on [0, 1).
  double uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

  /// Failures before the first success, success probability q: inverse cdf.
  std::uint64_t geometric_failures(double log1m_q) {
    return static_cast<std::uint64_t>(std::floor(std::log(uniform_pos()) / log1m_q));
  }

  std::uint64_t position() const { return counter_; }

 private:
  std::uint64_t key_;
  std::uint64_t counter_ = 0;
};

}  // namespace druin
