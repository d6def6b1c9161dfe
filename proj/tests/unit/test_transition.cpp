#include <gtest/gtest.h>

#include <numbers>

#include "oracles.hpp"
#include "ricnn/gradcheck.hpp"
#include "ricnn/transition.hpp"

using namespace ricnn;

namespace {

TransitionLayer<double> random_transition(int filters, int R, std::size_t m, std::size_t d, Rng& rng) {
  auto layer = TransitionLayer<double>::zeros(TransitionSpec{filters, R, Interp::Bilinear}, m, d);
  for (auto& v : layer.weights.values()) v = rng.normal();
  return layer;
}

Tensor<double> weight_slice(const Tensor<double>& w, std::size_t k) {
  const std::size_t m = w.extent(1), d = w.extent(3);
  return Tensor<double>({m, m, d}, std::vector<double>(w.data() + k * m * m * d, w.data() + (k + 1) * m * m * d));
}

}  // namespace

TEST(Transition, GridIsInnerProductWithRotatedWeights) {
  Rng rng(30);
  for (int R : {1, 2}) {
    const auto layer = random_transition(3, R, 5, 2, rng);
    const auto a = oracle::randn({5, 5, 2}, rng);
    const auto z = transition_forward(a, layer);
    ASSERT_EQ(z.shape(), (Shape{3, static_cast<std::size_t>(4 * R)}));
    for (std::size_t k = 0; k < 3; ++k) {
      for (int r = 0; r < 4 * R; ++r) {
        const auto w = oracle::rotate_bilinear(weight_slice(layer.weights, k), 2 * std::numbers::pi * r / (4 * R));
        double s = 0;
        for (std::size_t i = 0; i < a.size(); ++i) s += w[i] * a[i];
        EXPECT_NEAR(z(k, static_cast<std::size_t>(r)), s, 1e-12);
      }
    }
  }
}

TEST(Transition, QuarterTurnShiftsGrid) {
  Rng rng(31);
  for (int R : {1, 2, 3}) {
    const auto layer = random_transition(4, R, 7, 3, rng);
    const auto a = oracle::randn({7, 7, 3}, rng);
    const auto z = transition_forward(a, layer);
    for (int n = 1; n < 4; ++n) {
      const auto expected = circular_shift(z, 1, -static_cast<long>(n * R));
      EXPECT_LT(max_abs_diff(transition_forward(rot90(a, n), layer), expected), 1e-10) << "R=" << R << " n=" << n;
    }
  }
}

TEST(Transition, InvariantOutputIgnoresQuarterTurns) {
  Rng rng(32);
  const auto layer = random_transition(5, 2, 9, 2, rng);
  const auto a = oracle::randn({9, 9, 2}, rng);
  const auto out = invariant_forward(a, layer);
  for (int n = 1; n < 4; ++n) EXPECT_LT(max_abs_diff(invariant_forward(rot90(a, n), layer), out), 1e-10);
}

TEST(Transition, BackwardMatchesFiniteDifferences) {
  Rng rng(33);
  auto layer = random_transition(3, 1, 5, 2, rng);
  const auto a = oracle::randn({5, 5, 2}, rng);
  const auto probe = oracle::randn({3, 4}, rng);
  TransitionCache<double> cache;
  invariant_forward(a, layer, &cache);
  const auto grads = transition_backward(probe, layer, cache);

  auto dot = [&](const Tensor<double>& out) {
    double s = 0;
    for (std::size_t i = 0; i < out.size(); ++i) s += out[i] * probe[i];
    return s;
  };
  const auto fd_a = finite_diff_grad([&](const Tensor<double>& x) { return dot(invariant_forward(x, layer)); }, a, 1e-6);
  EXPECT_LT(max_abs_diff(grads.input, fd_a), 1e-6 * (1 + max_abs(fd_a)));
  const auto fd_w = finite_diff_grad(
      [&](const Tensor<double>& w) {
        auto l = layer;
        l.weights = w;
        return dot(invariant_forward(a, l));
      },
      layer.weights, 1e-6);
  EXPECT_LT(max_abs_diff(grads.weights, fd_w), 1e-6 * (1 + max_abs(fd_w)));
}

TEST(Transition, ShiftGridBackwardIsAdjoint) {
  Rng rng(34);
  const auto layer = random_transition(2, 2, 5, 1, rng);
  const auto a = oracle::randn({5, 5, 1}, rng);
  const auto g = oracle::randn({2, 8}, rng);
  TransitionCache<double> cache;
  const auto z = transition_forward(a, layer, &cache);
  const auto grads = shift_grid_backward(g, layer, cache);
  // z is linear in a, so <g, z> = <grad_a, a>.
  double lhs = 0, rhs = 0;
  for (std::size_t i = 0; i < z.size(); ++i) lhs += g[i] * z[i];
  for (std::size_t i = 0; i < a.size(); ++i) rhs += grads.input[i] * a[i];
  EXPECT_NEAR(lhs, rhs, 1e-10);
}

TEST(Transition, RejectsMismatchedInput) {
  Rng rng(35);
  const auto layer = random_transition(2, 1, 5, 2, rng);
  EXPECT_THROW(transition_forward(oracle::randn({7, 7, 2}, rng), layer), ValidationError);
  EXPECT_THROW(transition_forward(oracle::randn({5, 5, 1}, rng), layer), ValidationError);
}
