#pragma once

#include "ricnn/dft.hpp"
#include "ricnn/geometry.hpp"
#include "ricnn/tensor.hpp"

namespace ricnn {

struct TransitionSpec {
  int filters = 20;
  int subdivisions = 1;
  Interp interp = Interp::Bilinear;

  bool operator==(const TransitionSpec&) const = default;
};

/// Convolutional-to-dense transition: K weight tensors of shape M x M x d,
/// each applied at 4R rotations.
template <typename T>
struct TransitionLayer {
  TransitionSpec spec;
  Tensor<T> weights;  // K x M x M x d

  static TransitionLayer zeros(const TransitionSpec& spec, std::size_t extent, std::size_t depth);

  std::size_t rotations() const { return 4 * static_cast<std::size_t>(spec.subdivisions); }
  std::size_t parameter_count() const { return weights.size(); }
};

template <typename T>
struct TransitionCache {
  Tensor<T> input;
  Tensor<T> grid;     // z, K x 4R
  Spectrum spectrum;  // dft2(z)
};

/// z(k, r) = <rotate(Omega_k, theta_r), a>. Rotating a by a quarter turn
/// (rot90(a, 1)) circularly shifts z by -R along the rotation axis.
template <typename T>
Tensor<T> transition_forward(const Tensor<T>& a, const TransitionLayer<T>& layer,
                             TransitionCache<T>* cache = nullptr);

/// transition_forward followed by dft2_magnitude: the rotation-invariant z'.
template <typename T>
Tensor<T> invariant_forward(const Tensor<T>& a, const TransitionLayer<T>& layer,
                            TransitionCache<T>* cache = nullptr);

template <typename T>
struct TransitionGrads {
  Tensor<T> input;
  Tensor<T> weights;
};

/// Backward through the inner products only, from a gradient on z.
template <typename T>
TransitionGrads<T> shift_grid_backward(const Tensor<T>& grad_grid, const TransitionLayer<T>& layer,
                                       const TransitionCache<T>& cache);

/// Backward from a gradient on z' through |DFT| and the inner products.
/// Requires a cache filled by invariant_forward.
template <typename T>
TransitionGrads<T> transition_backward(const Tensor<T>& grad_invariant, const TransitionLayer<T>& layer,
                                       const TransitionCache<T>& cache);

}  // namespace ricnn
