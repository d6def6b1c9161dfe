#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "ricnn/geometry.hpp"
#include "ricnn/tensor.hpp"

namespace ricnn {

enum class Activation : std::uint8_t { Identity, ReLU };

std::string to_string(Activation act);
Activation parse_activation(const std::string& name);

/// Conic: per-region rotated filters (rotation-equivariant).
/// Standard: ordinary raster convolution with the unrotated filter.
enum class ConvMode : std::uint8_t { Conic, Standard };

/// How the origin pixel is pooled. AllRotations (max over all 4R rotations)
/// is the equivariant choice. FirstQuadrant pools only over r < R and exists
/// as a negative control: it breaks equivariance.
enum class OriginPooling : std::uint8_t { AllRotations, FirstQuadrant };

struct ConicConvSpec {
  int filters = 8;
  int kernel = 3;
  int subdivisions = 1;
  int downsample = 1;
  Activation activation = Activation::ReLU;
  Interp interp = Interp::Bilinear;
  ConvMode mode = ConvMode::Conic;
  OriginPooling origin = OriginPooling::AllRotations;

  bool operator==(const ConicConvSpec&) const = default;
};

/// K filters of shape h x h x d with one bias each.
template <typename T>
struct ConicConvLayer {
  ConicConvSpec spec;
  Tensor<T> filters;  // K x h x h x d
  Tensor<T> biases;   // K

  /// Zero-initialised layer for inputs of the given depth.
  static ConicConvLayer zeros(const ConicConvSpec& spec, std::size_t depth);

  std::size_t depth() const { return filters.extent(3); }
  std::size_t parameter_count() const { return filters.size() + biases.size(); }
};

/// Extent after centred subsampling by D: only coordinates divisible by D
/// are kept, giving 2 * floor((M - 1) / (2D)) + 1.
std::size_t conic_output_extent(std::size_t m, int downsample);

template <typename T>
struct ConicConvCache {
  Tensor<T> input;
  Tensor<T> pre_activation;             // M' x M' x K
  std::vector<std::uint16_t> selected;  // rotation index used per (pixel, k)
};

/// phi_r(a, w) at every pixel of the M x M grid: correlation with the filter
/// rotated by theta_r, zero outside the grid.
template <typename T>
Tensor<T> region_conv(const Tensor<T>& a, const Tensor<T>& w, int r, const RegionMap& map,
                      Interp scheme = Interp::Bilinear);

/// Conic convolution followed by centred subsampling, bias and activation.
/// Cone(r) pixels use rotation r, Boundary(r) pixels the max over rotations
/// r and r+1 (mod 4R), the origin the max over all rotations. Ties go to the
/// lowest rotation index. `map` must match the input extent and the layer's
/// subdivisions (it is ignored in Standard mode).
template <typename T>
Tensor<T> conic_forward(const Tensor<T>& a, const ConicConvLayer<T>& layer, const RegionMap& map,
                        ConicConvCache<T>* cache = nullptr);

template <typename T>
struct ConicConvGrads {
  Tensor<T> input;
  Tensor<T> filters;
  Tensor<T> biases;
};

/// Vector-Jacobian product of conic_forward. Max pools route the gradient to
/// the rotation recorded in the cache; filter gradients pass through the
/// adjoint of each filter rotation.
template <typename T>
ConicConvGrads<T> conic_backward(const Tensor<T>& grad_out, const ConicConvLayer<T>& layer,
                                 const ConicConvCache<T>& cache);

}  // namespace ricnn
