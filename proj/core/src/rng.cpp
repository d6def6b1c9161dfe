#include "ricnn/rng.hpp"

#include <cmath>
#include <numbers>
#include <numeric>

#include "ricnn/errors.hpp"

namespace ricnn {

namespace {
constexpr std::uint64_t kGolden = 0x9E3779B97F4A7C15ULL;
}

std::uint64_t mix64(std::uint64_t z) {
  z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL;
  z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL;
  return z ^ (z >> 31);
}

std::uint64_t Rng::next_u64() {
  state_ += kGolden;
  return mix64(state_);
}

double Rng::uniform() { return static_cast<double>(next_u64() >> 11) * 0x1.0p-53; }

double Rng::uniform(double lo, double hi) { return lo + (hi - lo) * uniform(); }

std::uint64_t Rng::below(std::uint64_t n) {
  if (n == 0) throw ValidationError("Rng::below: n must be positive");
  // Rejection sampling keeps the result exactly uniform.
  const std::uint64_t limit = (~std::uint64_t{0}) - ((~std::uint64_t{0}) % n);
  std::uint64_t v;
  do {
    v = next_u64();
  } while (v >= limit);
  return v % n;
}

long Rng::between(long lo, long hi) {
  if (hi < lo) throw ValidationError("Rng::between: empty range");
  return lo + static_cast<long>(below(static_cast<std::uint64_t>(hi - lo) + 1));
}

double Rng::normal() {
  if (has_spare_) {
    has_spare_ = false;
    return spare_;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  const double angle = 2.0 * std::numbers::pi * u2;
  spare_ = radius * std::sin(angle);
  has_spare_ = true;
  return radius * std::cos(angle);
}

double Rng::exponential(double rate) {
  if (!(rate > 0.0)) throw ValidationError("Rng::exponential: rate must be positive");
  return -std::log1p(-uniform()) / rate;
}

Rng Rng::split(std::uint64_t key) const { return Rng(mix64(state_ ^ mix64(key + kGolden))); }

std::vector<std::size_t> Rng::permutation(std::size_t n) {
  std::vector<std::size_t> p(n);
  std::iota(p.begin(), p.end(), std::size_t{0});
  for (std::size_t i = n; i > 1; --i) {
    const std::size_t j = below(i);
    std::swap(p[i - 1], p[j]);
  }
  return p;
}

}  // namespace ricnn
