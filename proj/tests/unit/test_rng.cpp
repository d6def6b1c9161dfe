#include <gtest/gtest.h>

#include <algorithm>
#include <cmath>
#include <numeric>

#include "ricnn/rng.hpp"

using ricnn::Rng;

TEST(Rng, SameSeedSameStream) {
  Rng a(42), b(42), c(43);
  for (int i = 0; i < 100; ++i) {
    const auto x = a.next_u64();
    EXPECT_EQ(x, b.next_u64());
    EXPECT_NE(x, c.next_u64());
  }
}

TEST(Rng, SplitMix64ReferenceValues) {
  // First outputs of SplitMix64 seeded with 0 (published reference values).
  Rng r(0);
  EXPECT_EQ(r.next_u64(), 0xe220a8397b1dcdafULL);
  EXPECT_EQ(r.next_u64(), 0x6e789e6aa1b965f4ULL);
  EXPECT_EQ(r.next_u64(), 0x06c45d188009454fULL);
}

TEST(Rng, UniformMoments) {
  Rng r(1);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double u = r.uniform();
    ASSERT_GE(u, 0.0);
    ASSERT_LT(u, 1.0);
    s += u;
    s2 += u * u;
  }
  const double mean = s / n, var = s2 / n - mean * mean;
  EXPECT_NEAR(mean, 0.5, 5 * std::sqrt(1.0 / 12 / n));
  EXPECT_NEAR(var, 1.0 / 12, 2e-3);
}

TEST(Rng, BelowAndBetweenCoverRange) {
  Rng r(2);
  std::vector<int> counts(7, 0);
  for (int i = 0; i < 70000; ++i) ++counts[r.below(7)];
  for (int c : counts) EXPECT_NEAR(c, 10000, 5 * std::sqrt(10000 * 6.0 / 7));
  long lo = 10, hi = -10;
  for (int i = 0; i < 10000; ++i) {
    const long v = r.between(-3, 3);
    lo = std::min(lo, v);
    hi = std::max(hi, v);
  }
  EXPECT_EQ(lo, -3);
  EXPECT_EQ(hi, 3);
}

TEST(Rng, NormalMoments) {
  Rng r(3);
  const int n = 200000;
  double s = 0, s2 = 0;
  for (int i = 0; i < n; ++i) {
    const double z = r.normal(2.0, 3.0);
    s += z;
    s2 += z * z;
  }
  const double mean = s / n, var = s2 / n - mean * mean;
  EXPECT_NEAR(mean, 2.0, 5 * 3.0 / std::sqrt(n));
  EXPECT_NEAR(var, 9.0, 9.0 * 5 * std::sqrt(2.0 / n));
}

TEST(Rng, ExponentialMean) {
  Rng r(4);
  const int n = 200000;
  double s = 0;
  for (int i = 0; i < n; ++i) {
    const double e = r.exponential(50.0);
    ASSERT_GE(e, 0.0);
    s += e;
  }
  EXPECT_NEAR(s / n, 1.0 / 50, 5 * (1.0 / 50) / std::sqrt(n));
}

TEST(Rng, PermutationIsPermutation) {
  Rng r(5);
  auto p = r.permutation(100);
  std::vector<std::size_t> sorted = p;
  std::sort(sorted.begin(), sorted.end());
  std::vector<std::size_t> expected(100);
  std::iota(expected.begin(), expected.end(), 0);
  EXPECT_EQ(sorted, expected);
  EXPECT_NE(p, expected);
}

TEST(Rng, SplitDoesNotAdvanceAndDiffersByKey) {
  Rng r(6);
  const auto before = r.state();
  Rng a = r.split(1), b = r.split(2), a2 = r.split(1);
  EXPECT_EQ(r.state(), before);
  const auto x = a.next_u64();
  EXPECT_EQ(x, a2.next_u64());
  EXPECT_NE(x, b.next_u64());
}
