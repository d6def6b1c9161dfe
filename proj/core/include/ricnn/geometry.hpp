#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ricnn/tensor.hpp"

namespace ricnn {

enum class RegionKind : std::uint8_t { Cone, Boundary, Origin };

/// Label of one grid point in the conic partition. For Cone(r) the polar
/// angle lies strictly between theta_r and theta_{r+1}; Boundary(r) sits
/// exactly on theta_r; theta_r = 2 pi r / (4R).
struct RegionLabel {
  RegionKind kind = RegionKind::Origin;
  int index = 0;

  static RegionLabel origin() { return {RegionKind::Origin, 0}; }
  static RegionLabel cone(int r) { return {RegionKind::Cone, r}; }
  static RegionLabel boundary(int r) { return {RegionKind::Boundary, r}; }

  bool operator==(const RegionLabel&) const = default;
};

std::string to_string(const RegionLabel& label);

/// Classifies (x, y) by its polar angle atan2(y, x) in [0, 2 pi).
///
/// Boundary membership is decided with integer tests: the axes are always
/// boundaries and the diagonals are boundaries exactly when R is even. No
/// other theta_r has a rational slope, so no other lattice point can lie on a
/// boundary. The result satisfies
///   classify_point(mu_1(x, y), R).index == (classify_point(x, y, R).index + R) mod 4R
/// exactly, because the quadrant is factored out before any trigonometry.
RegionLabel classify_point(long x, long y, int subdivisions);

/// Labels for every pixel of a centred M x M grid (M odd).
class RegionMap {
 public:
  RegionMap() = default;
  RegionMap(std::size_t size, int subdivisions);

  std::size_t size() const { return size_; }
  int subdivisions() const { return subdivisions_; }
  int rotations() const { return 4 * subdivisions_; }

  /// Label of array index (row, col).
  const RegionLabel& at(std::size_t row, std::size_t col) const { return labels_[row * size_ + col]; }

  /// theta_r for this partition.
  double angle(int r) const;

  bool operator==(const RegionMap&) const = default;

 private:
  std::size_t size_ = 0;
  int subdivisions_ = 1;
  std::vector<RegionLabel> labels_;
};

RegionMap build_region_map(std::size_t size, int subdivisions);

enum class Interp : std::uint8_t { Nearest, Bilinear };

std::string to_string(Interp scheme);
Interp parse_interp(const std::string& name);

/// Sparse linear map realising a filter rotation on an h x w spatial grid:
/// out[dst] += weight * in[src] for each tap. Depth channels are rotated
/// independently with the same taps.
struct FilterRotation {
  struct Tap {
    std::uint32_t dst;
    std::uint32_t src;
    double weight;
  };
  std::size_t in_height = 1;
  std::size_t in_width = 1;
  std::size_t height = 1;  // output extents
  std::size_t width = 1;
  std::vector<Tap> taps;

  template <typename T>
  Tensor<T> apply(const Tensor<T>& w) const;

  /// Transpose of apply(): maps a gradient on the rotated filter back onto
  /// the unrotated one.
  template <typename T>
  Tensor<T> apply_adjoint(const Tensor<T>& g) const;
};

/// Counter-clockwise rotation by theta: out(p) = w(R(-theta) p), zero outside
/// the support. theta is split into n quarter turns plus a residual in
/// [0, pi/2); the residual is resampled with `scheme` and the quarter turns
/// are an exact index permutation, so make_filter_rotation(theta + pi/2)
/// equals the residual taps of theta followed by a quarter turn. At
/// theta = n pi/2 the map is exactly rot90(., -n) for both schemes.
FilterRotation make_filter_rotation(std::size_t height, std::size_t width, double theta, Interp scheme);

/// Rotation by theta_r = 2 pi r / (4R), split exactly as r = nR + s.
FilterRotation make_region_rotation(std::size_t height, std::size_t width, int r, int subdivisions,
                                    Interp scheme);

/// Rotates a filter h x w (x depth...). Extents must be odd.
template <typename T>
Tensor<T> rotate_filter(const Tensor<T>& w, double theta, Interp scheme = Interp::Bilinear);

}  // namespace ricnn
