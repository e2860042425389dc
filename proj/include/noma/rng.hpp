#pragma once

#include <cstdint>
#include <random>

namespace noma {

/// Portable random stream.
///
/// The engine is std::mt19937_64, whose output sequence is fixed by the C++
/// standard. The standard distributions are not portable across library
/// implementations, so uniform and exponential variates are derived here
/// from raw 64-bit words.
///
/// Stream splitting: the stream for (seed, trial, tag) is seeded with
/// splitmix64(seed ^ trial) ^ splitmix64(tag). Tag 0 is the scenario stream;
/// other tags are reserved for scheme-specific randomness (random pairing).
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  static Rng for_trial(std::uint64_t seed, std::uint64_t trial, std::uint64_t tag = 0) {
    return Rng(splitmix64(seed ^ trial) ^ splitmix64(tag + 0x5bd1e995ULL));
  }

  std::uint64_t next_u64() { return engine_(); }

  /// Uniform on [0, 1) with 53 random bits.
  double uniform() { return static_cast<double>(engine_() >> 11) * 0x1.0p-53; }

  /// Unit-mean exponential variate.
  double exponential();

  /// Uniform integer on [0, n).
  std::uint64_t below(std::uint64_t n);

  static std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
  }

 private:
  std::mt19937_64 engine_;
};

}  // namespace noma
