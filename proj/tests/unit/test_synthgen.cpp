#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "ricnn/synthgen.hpp"

using namespace ricnn;

namespace {

ClassSpec single_gaussian(Vec2 mean, Mat2 cov, double count) { return ClassSpec{{GaussianComponent{mean, cov, count}}}; }

}  // namespace

TEST(ClassSpecs, ShapeAndRanges) {
  Rng rng(70);
  const auto specs = sample_class_specs(50, 10, rng);
  ASSERT_EQ(specs.size(), 50u);
  for (const auto& s : specs) {
    ASSERT_EQ(s.gaussians.size(), 10u);
    for (const auto& g : s.gaussians) {
      EXPECT_TRUE(is_spd(g.covariance));
      EXPECT_EQ(g.covariance[1], g.covariance[2]);
      EXPECT_LE(std::abs(g.mean[0]), 0.8);
      EXPECT_LE(std::abs(g.mean[1]), 0.8);
      EXPECT_GE(g.expected_count, 20.0);
      EXPECT_LE(g.expected_count, 60.0);
      // eigenvalues lie in [0.005, 0.05]
      const double tr = g.covariance[0] + g.covariance[3];
      const double det = g.covariance[0] * g.covariance[3] - g.covariance[1] * g.covariance[2];
      const double disc = std::sqrt(std::max(0.0, tr * tr / 4 - det));
      EXPECT_GE(tr / 2 - disc, 0.005 - 1e-12);
      EXPECT_LE(tr / 2 + disc, 0.05 + 1e-12);
    }
  }
}

TEST(ClassSpecs, Spd) {
  EXPECT_TRUE(is_spd({1, 0, 0, 1}));
  EXPECT_FALSE(is_spd({1, 2, 2, 1}));
  EXPECT_FALSE(is_spd({1, 0.1, 0, 1}));
  EXPECT_FALSE(is_spd({0, 0, 0, 1}));
}

TEST(RotationMatrix, CounterClockwise) {
  const auto r = rotation_matrix(std::numbers::pi / 2);
  EXPECT_NEAR(r[0], 0, 1e-15);
  EXPECT_NEAR(r[1], -1, 1e-15);
  EXPECT_NEAR(r[2], 1, 1e-15);
  EXPECT_NEAR(r[3], 0, 1e-15);
}

TEST(PointCloud, RotatedMomentsMatchTheory) {
  // p = R eta + R L z with eta ~ N(mu, J): mean R mu, covariance R (J + Sigma) R^T.
  const Vec2 mu{0.4, -0.2};
  const Mat2 sigma{0.03, 0.01, 0.01, 0.01};
  const auto spec = single_gaussian(mu, sigma, 40);
  GenParams params;
  const double theta = std::numbers::pi / 3;
  Rng rng(71);
  const int images = 2000;
  double sx = 0, sy = 0, sxx = 0, sxy = 0, syy = 0;
  std::size_t n = 0;
  for (int i = 0; i < images; ++i) {
    const auto cloud = sample_point_cloud(spec, params, theta, rng);
    for (const auto& p : cloud.points) {
      sx += p[0];
      sy += p[1];
      sxx += p[0] * p[0];
      sxy += p[0] * p[1];
      syy += p[1] * p[1];
      ++n;
    }
  }
  const auto R = rotation_matrix(theta);
  const double ex = R[0] * mu[0] + R[1] * mu[1], ey = R[2] * mu[0] + R[3] * mu[1];
  const double mx = sx / n, my = sy / n;
  // each image shares one eta, so the spread of the mean is set by J and Sigma / 40
  const double se = std::sqrt((0.0025 + 0.03 / 40) / images);
  EXPECT_NEAR(mx, ex, 5 * se);
  EXPECT_NEAR(my, ey, 5 * se);

  const Mat2 c{sigma[0] + 0.0025, sigma[1], sigma[2], sigma[3] + 0.0025};
  // R C R^T
  const double a = R[0] * c[0] + R[1] * c[2], b = R[0] * c[1] + R[1] * c[3];
  const double d = R[2] * c[0] + R[3] * c[2], e = R[2] * c[1] + R[3] * c[3];
  const double cxx = a * R[0] + b * R[1], cxy = a * R[2] + b * R[3], cyy = d * R[2] + e * R[3];
  EXPECT_NEAR(sxx / n - mx * mx, cxx, 0.1 * cxx);
  EXPECT_NEAR(syy / n - my * my, cyy, 0.1 * cyy);
  EXPECT_NEAR(sxy / n - mx * my, cxy, 0.1 * std::sqrt(cxx * cyy));
  EXPECT_NEAR(static_cast<double>(n) / images, 40.0, 0.5);
}

TEST(PointCloud, IntensitiesInRange) {
  Rng rng(72);
  GenParams params;
  const auto cloud = sample_point_cloud(single_gaussian({0, 0}, {0.01, 0, 0, 0.01}, 50), params, 0.0, rng);
  ASSERT_EQ(cloud.points.size(), cloud.intensities.size());
  for (double v : cloud.intensities) {
    EXPECT_GE(v, 0.8);
    EXPECT_LE(v, 1.2);
  }
}

TEST(Rasterize, YPointsUp) {
  GenParams params;
  PointCloud cloud;
  cloud.background = 0.1;
  cloud.points = {{0.0, 0.0}, {0.0, 0.9}, {5.0, 0.0}};
  cloud.intensities = {1.0, 2.0, 3.0};
  const auto img = rasterize(cloud, params);
  EXPECT_EQ(img(25, 25, 0), 1.0);
  EXPECT_EQ(img(3, 25, 0), 2.0);  // floor((1.05 - 0.9) / 2.1 * 50)
  EXPECT_EQ(img(0, 0, 0), 0.1);
  double total = 0;
  for (auto v : img.values()) total += v;
  EXPECT_NEAR(total, 0.1 * 2498 + 3.0, 1e-9);  // the out-of-range point is dropped
}

TEST(GaussianBlur, PreservesConstantsAndInteriorMass) {
  const Tensor<double> flat({20, 20, 1}, 0.3);
  EXPECT_LT(max_abs_diff(gaussian_blur(flat, 1.0), flat), 1e-14);
  Tensor<double> delta({21, 21, 1}, 0.0);
  delta(10, 10, 0) = 1.0;
  const auto b = gaussian_blur(delta, 1.0);
  double total = 0;
  for (auto v : b.values()) total += v;
  EXPECT_NEAR(total, 1.0, 1e-12);
  EXPECT_NEAR(b(10, 11, 0), b(11, 10, 0), 1e-15);
  EXPECT_GT(b(10, 10, 0), b(10, 11, 0));
}

TEST(GenerateImage, EmptyClassHasBackgroundPlusNoiseMean) {
  GenParams params;
  params.max_jitter = 0;
  const ClassSpec empty{};
  Rng rng(73);
  const int n = 400;
  double total = 0;
  for (int i = 0; i < n; ++i) {
    const auto img = generate_image(empty, params, rng);
    double s = 0;
    for (auto v : img.values()) s += v;
    total += s / static_cast<double>(img.size());
  }
  const double expected = 1.0 / params.background_rate + 1.0 / params.noise_rate;
  const double sigma = (1.0 / params.background_rate) / std::sqrt(static_cast<double>(n));
  EXPECT_NEAR(total / n, expected, 3 * sigma);
}

TEST(GenerateDataset, SizesLabelsAndDeterminism) {
  Rng rng(74);
  const auto specs = sample_class_specs(4, 3, rng);
  GenParams params;
  params.image_size = 24;
  const auto a = generate_dataset(specs, params, 5, 9);
  const auto b = generate_dataset(specs, params, 5, 9);
  ASSERT_EQ(a.size(), 20u);
  EXPECT_EQ(a.images.shape(), (Shape{20, 24, 24, 1}));
  EXPECT_EQ(a.classes, 4u);
  std::vector<int> hist(4, 0);
  for (auto l : a.labels) ++hist[l];
  for (int h : hist) EXPECT_EQ(h, 5);
  EXPECT_EQ(a.images, b.images);
  EXPECT_EQ(a.metadata, b.metadata);
  for (auto v : a.images.values()) {
    EXPECT_TRUE(std::isfinite(v));
    EXPECT_GE(v, 0.0f);
  }
  EXPECT_NE(generate_dataset(specs, params, 5, 10).images, a.images);
  EXPECT_EQ(a.metadata["spec_hash"], spec_hash(specs));
}

TEST(SpecHash, SensitiveToEveryValue) {
  Rng rng(75);
  auto specs = sample_class_specs(2, 2, rng);
  const auto h = spec_hash(specs);
  EXPECT_EQ(h.size(), 16u);
  EXPECT_EQ(spec_hash(specs), h);
  specs[1].gaussians[1].expected_count += 1e-9;
  EXPECT_NE(spec_hash(specs), h);
}

TEST(GenParams, Validation) {
  GenParams p;
  EXPECT_NO_THROW(validate(p));
  p.background_rate = 0;
  EXPECT_THROW(validate(p), ValidationError);
  p = GenParams{};
  p.mean_jitter = {1, 2, 2, 1};
  EXPECT_THROW(validate(p), ValidationError);
  p = GenParams{};
  p.image_size = 0;
  EXPECT_THROW(validate(p), ValidationError);
}
