#pragma once

#include <array>
#include <cstdint>
#include <string>
#include <vector>

#include "ricnn/dataset.hpp"
#include "ricnn/rng.hpp"
#include "ricnn/tensor.hpp"

namespace ricnn {

using Vec2 = std::array<double, 2>;
using Mat2 = std::array<double, 4>;  // row-major

bool is_spd(const Mat2& m);

struct GaussianComponent {
  Vec2 mean;              // in [-1, 1]^2
  Mat2 covariance;        // symmetric positive definite
  double expected_count;  // mean number of points

  bool operator==(const GaussianComponent&) const = default;
};

/// One class: a mixture of point-emitting Gaussians.
struct ClassSpec {
  std::vector<GaussianComponent> gaussians;

  bool operator==(const ClassSpec&) const = default;
};

struct GenParams {
  std::size_t image_size = 50;
  double background_rate = 20.0;            // b ~ Exp(rate)
  Mat2 mean_jitter = {0.0025, 0.0, 0.0, 0.0025};  // eta_g ~ N(mu_g, mean_jitter)
  double count_std = 5.0;                   // n_g ~ N(mu_n_g, count_std)
  double intensity_center = 1.0;
  double intensity_half_range = 0.2;
  double psf_variance = 1.0;                // squared pixels
  double noise_rate = 50.0;                 // additive Exp(rate) per pixel
  int max_jitter = 3;                       // camera offset in pixels
  double margin = 0.05;                     // raster covers [-(1+margin), 1+margin]^2

  bool operator==(const GenParams&) const = default;
};

void validate(const GenParams& params);

/// mu_g ~ U[-0.8, 0.8]^2, Sigma_g = Q diag(l1, l2) Q^T with l ~ U[0.005, 0.05]
/// and Q a uniform random rotation, mu_n_g ~ U[20, 60].
std::vector<ClassSpec> sample_class_specs(std::size_t classes, std::size_t gaussians, Rng& rng);

/// Rotation matrix [[cos t, -sin t], [sin t, cos t]].
Mat2 rotation_matrix(double theta);

struct PointCloud {
  double theta = 0.0;
  double background = 0.0;
  std::vector<Vec2> points;
  std::vector<double> intensities;
};

/// Points of one image before rasterisation, for a given rotation angle.
PointCloud sample_point_cloud(const ClassSpec& spec, const GenParams& params, double theta, Rng& rng);

/// Background, random rotation, points, PSF blur, pixel noise and camera
/// offset. Returns image_size x image_size x 1.
Tensor<float> generate_image(const ClassSpec& spec, const GenParams& params, Rng& rng);

/// Nearest-pixel rasterisation over the background; later points overwrite.
Tensor<double> rasterize(const PointCloud& cloud, const GenParams& params);

/// Separable Gaussian blur, radius ceil(3 sqrt(variance)), weights
/// renormalised, edges clamped.
Tensor<double> gaussian_blur(const Tensor<double>& image, double variance);

/// Hex digest over the bit patterns of every spec value.
std::string spec_hash(const std::vector<ClassSpec>& specs);

/// n images per class, class-major. Image i of class k is drawn from the
/// stream Rng(seed).split(k * n + i). Metadata records seed, params, specs
/// and their hash.
LabeledDataset generate_dataset(const std::vector<ClassSpec>& specs, const GenParams& params,
                                std::size_t per_class, std::uint64_t seed);

}  // namespace ricnn
