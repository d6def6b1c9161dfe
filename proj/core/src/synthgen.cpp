#include "ricnn/synthgen.hpp"

#include <cmath>
#include <cstdio>
#include <cstring>
#include <numbers>

#include "ricnn/config.hpp"
#include "ricnn/errors.hpp"

namespace ricnn {

bool is_spd(const Mat2& m) {
  const double sym_tol = 1e-12 * (std::abs(m[1]) + std::abs(m[2]) + 1.0);
  if (std::abs(m[1] - m[2]) > sym_tol) return false;
  return m[0] > 0.0 && m[0] * m[3] - m[1] * m[2] > 0.0;
}

void validate(const GenParams& p) {
  if (p.image_size < 1) throw ValidationError("image_size must be >= 1");
  auto positive = [](double v, const char* name) {
    if (!(v > 0.0) || !std::isfinite(v)) throw ValidationError(std::string(name) + " must be > 0");
  };
  positive(p.background_rate, "background_rate");
  positive(p.count_std, "count_std");
  positive(p.psf_variance, "psf_variance");
  positive(p.noise_rate, "noise_rate");
  positive(p.intensity_center, "intensity_center");
  if (!(p.intensity_half_range >= 0.0)) throw ValidationError("intensity_half_range must be >= 0");
  if (!is_spd(p.mean_jitter)) throw ValidationError("mean_jitter must be symmetric positive definite");
  if (p.max_jitter < 0) throw ValidationError("max_jitter must be >= 0");
  if (!(p.margin >= 0.0)) throw ValidationError("margin must be >= 0");
}

Mat2 rotation_matrix(double theta) {
  const double c = std::cos(theta), s = std::sin(theta);
  return {c, -s, s, c};
}

namespace {

Vec2 mul(const Mat2& m, const Vec2& v) { return {m[0] * v[0] + m[1] * v[1], m[2] * v[0] + m[3] * v[1]}; }

// Lower-triangular L with L L^T = m.
Mat2 cholesky(const Mat2& m) {
  const double l00 = std::sqrt(m[0]);
  const double l10 = m[2] / l00;
  const double l11 = std::sqrt(m[3] - l10 * l10);
  return {l00, 0.0, l10, l11};
}

Vec2 sample_gaussian(const Vec2& mean, const Mat2& chol, Rng& rng) {
  const double z0 = rng.normal(), z1 = rng.normal();
  return {mean[0] + chol[0] * z0, mean[1] + chol[2] * z0 + chol[3] * z1};
}

}  // namespace

std::vector<ClassSpec> sample_class_specs(std::size_t classes, std::size_t gaussians, Rng& rng) {
  if (classes < 1 || gaussians < 1) throw ValidationError("classes and gaussians must be >= 1");
  std::vector<ClassSpec> specs(classes);
  for (auto& spec : specs) {
    spec.gaussians.reserve(gaussians);
    for (std::size_t g = 0; g < gaussians; ++g) {
      GaussianComponent c;
      c.mean = {rng.uniform(-0.8, 0.8), rng.uniform(-0.8, 0.8)};
      const double l1 = rng.uniform(0.005, 0.05);
      const double l2 = rng.uniform(0.005, 0.05);
      const Mat2 q = rotation_matrix(rng.uniform(0.0, std::numbers::pi));
      // Q diag(l1, l2) Q^T
      const double a = q[0], b = q[1], cq = q[2], d = q[3];
      const double off = a * cq * l1 + b * d * l2;
      c.covariance = {a * a * l1 + b * b * l2, off, off, cq * cq * l1 + d * d * l2};
      c.expected_count = rng.uniform(20.0, 60.0);
      spec.gaussians.push_back(c);
    }
  }
  return specs;
}

PointCloud sample_point_cloud(const ClassSpec& spec, const GenParams& params, double theta, Rng& rng) {
  PointCloud cloud;
  cloud.theta = theta;
  const Mat2 rot = rotation_matrix(theta);
  const Mat2 jitter_chol = cholesky(params.mean_jitter);
  for (const auto& g : spec.gaussians) {
    if (!is_spd(g.covariance)) throw ValidationError("class covariance is not symmetric positive definite");
    const Vec2 eta = sample_gaussian(g.mean, jitter_chol, rng);
    const double n_real = rng.normal(g.expected_count, params.count_std);
    const long n = std::max(0L, std::lround(n_real));
    const Vec2 centre = mul(rot, eta);
    const Mat2 chol = cholesky(g.covariance);
    for (long i = 0; i < n; ++i) {
      // R (eta + L z) has covariance R Sigma_g R^T around R eta.
      const Vec2 local = sample_gaussian({0.0, 0.0}, chol, rng);
      const Vec2 offset = mul(rot, local);
      cloud.points.push_back({centre[0] + offset[0], centre[1] + offset[1]});
      cloud.intensities.push_back(rng.uniform(params.intensity_center - params.intensity_half_range,
                                              params.intensity_center + params.intensity_half_range));
    }
  }
  return cloud;
}

Tensor<double> rasterize(const PointCloud& cloud, const GenParams& params) {
  const std::size_t s = params.image_size;
  const double half = 1.0 + params.margin;
  Tensor<double> image({s, s, 1}, cloud.background);
  for (std::size_t i = 0; i < cloud.points.size(); ++i) {
    const auto& p = cloud.points[i];
    // x to the right, y up; pixel centres tile [-half, half]^2.
    const double col = std::floor((p[0] + half) / (2.0 * half) * static_cast<double>(s));
    const double row = std::floor((half - p[1]) / (2.0 * half) * static_cast<double>(s));
    if (col < 0.0 || row < 0.0 || col >= static_cast<double>(s) || row >= static_cast<double>(s)) continue;
    image(static_cast<std::size_t>(row), static_cast<std::size_t>(col), std::size_t{0}) = cloud.intensities[i];
  }
  return image;
}

Tensor<double> gaussian_blur(const Tensor<double>& image, double variance) {
  if (image.rank() != 3) throw ValidationError("gaussian_blur expects H x W x C");
  const double sigma = std::sqrt(variance);
  const long radius = static_cast<long>(std::ceil(3.0 * sigma));
  std::vector<double> kernel(static_cast<std::size_t>(2 * radius + 1));
  double total = 0.0;
  for (long k = -radius; k <= radius; ++k) {
    const double w = std::exp(-0.5 * static_cast<double>(k * k) / variance);
    kernel[static_cast<std::size_t>(k + radius)] = w;
    total += w;
  }
  for (auto& w : kernel) w /= total;

  const long h = static_cast<long>(image.extent(0)), wd = static_cast<long>(image.extent(1));
  const std::size_t c = image.extent(2);
  auto clamp = [](long v, long n) { return std::min(std::max(v, 0L), n - 1); };
  Tensor<double> tmp(image.shape(), 0.0), out(image.shape(), 0.0);
  for (long i = 0; i < h; ++i) {
    for (long j = 0; j < wd; ++j) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (long k = -radius; k <= radius; ++k) {
          acc += kernel[static_cast<std::size_t>(k + radius)] *
                 image(static_cast<std::size_t>(i), static_cast<std::size_t>(clamp(j + k, wd)), ch);
        }
        tmp(static_cast<std::size_t>(i), static_cast<std::size_t>(j), ch) = acc;
      }
    }
  }
  for (long i = 0; i < h; ++i) {
    for (long j = 0; j < wd; ++j) {
      for (std::size_t ch = 0; ch < c; ++ch) {
        double acc = 0.0;
        for (long k = -radius; k <= radius; ++k) {
          acc += kernel[static_cast<std::size_t>(k + radius)] *
                 tmp(static_cast<std::size_t>(clamp(i + k, h)), static_cast<std::size_t>(j), ch);
        }
        out(static_cast<std::size_t>(i), static_cast<std::size_t>(j), ch) = acc;
      }
    }
  }
  return out;
}

Tensor<float> generate_image(const ClassSpec& spec, const GenParams& params, Rng& rng) {
  const double background = rng.exponential(params.background_rate);
  const double theta = rng.uniform(0.0, 2.0 * std::numbers::pi);
  PointCloud cloud = sample_point_cloud(spec, params, theta, rng);
  cloud.background = background;
  Tensor<double> image = gaussian_blur(rasterize(cloud, params), params.psf_variance);
  for (auto& v : image.values()) v += rng.exponential(params.noise_rate);
  const int dx = static_cast<int>(rng.between(-params.max_jitter, params.max_jitter));
  const int dy = static_cast<int>(rng.between(-params.max_jitter, params.max_jitter));
  return translate(image, dx, dy).cast<float>();
}

std::string spec_hash(const std::vector<ClassSpec>& specs) {
  std::uint64_t h = 0x243f6a8885a308d3ULL;
  auto feed = [&h](double v) {
    std::uint64_t bits;
    std::memcpy(&bits, &v, sizeof bits);
    h = mix64(h ^ bits);
  };
  for (const auto& s : specs) {
    feed(static_cast<double>(s.gaussians.size()));
    for (const auto& g : s.gaussians) {
      feed(g.mean[0]);
      feed(g.mean[1]);
      for (double v : g.covariance) feed(v);
      feed(g.expected_count);
    }
  }
  char buf[17];
  std::snprintf(buf, sizeof buf, "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

LabeledDataset generate_dataset(const std::vector<ClassSpec>& specs, const GenParams& params,
                                std::size_t per_class, std::uint64_t seed) {
  validate(params);
  if (specs.empty()) throw ValidationError("no class specs");
  if (per_class < 1) throw ValidationError("examples per class must be >= 1");
  const std::size_t s = params.image_size;
  const std::size_t n = specs.size() * per_class;
  std::vector<float> pixels;
  pixels.reserve(n * s * s);
  std::vector<std::uint32_t> labels;
  labels.reserve(n);
  const Rng root(seed);
  for (std::size_t k = 0; k < specs.size(); ++k) {
    for (std::size_t i = 0; i < per_class; ++i) {
      Rng rng = root.split(k * per_class + i);
      const auto img = generate_image(specs[k], params, rng);
      pixels.insert(pixels.end(), img.data(), img.data() + img.size());
      labels.push_back(static_cast<std::uint32_t>(k));
    }
  }
  LabeledDataset out;
  out.images = Tensor<float>({n, s, s, 1}, std::move(pixels));
  out.labels = std::move(labels);
  out.classes = specs.size();
  out.metadata = {
      {"generator", "gmm"},
      {"seed", seed},
      {"per_class", per_class},
      {"params", params},
      {"specs", specs},
      {"spec_hash", spec_hash(specs)},
  };
  return out;
}

}  // namespace ricnn
