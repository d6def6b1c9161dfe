#pragma once

#include <cstdint>
#include <vector>

namespace ricnn {

/// SplitMix64 generator (Steele, Lea & Flood 2014). The state is a 64-bit
/// counter advanced by the golden-ratio increment; each output is a fixed
/// bijective mix of the counter, so streams are identical on every platform.
/// Distribution transforms are implemented here rather than taken from
/// <random>, whose distributions are implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : state_(seed) {}

  std::uint64_t next_u64();

  /// Uniform on [0, 1) with 53 random bits.
  double uniform();
  double uniform(double lo, double hi);

  /// Uniform integer in [0, n). n must be > 0.
  std::uint64_t below(std::uint64_t n);
  /// Uniform integer in [lo, hi] inclusive.
  long between(long lo, long hi);

  /// Standard normal (Box-Muller, one cached spare).
  double normal();
  double normal(double mean, double stddev) { return mean + stddev * normal(); }

  /// Exponential with the given rate (mean 1/rate).
  double exponential(double rate);

  /// Independent child stream keyed by `key`; does not advance this stream.
  Rng split(std::uint64_t key) const;

  /// Fisher-Yates permutation of 0..n-1.
  std::vector<std::size_t> permutation(std::size_t n);

  std::uint64_t state() const { return state_; }

 private:
  std::uint64_t state_;
  bool has_spare_ = false;
  double spare_ = 0.0;
};

/// The SplitMix64 finaliser; a good 64-bit hash for keys.
std::uint64_t mix64(std::uint64_t x);

}  // namespace ricnn
