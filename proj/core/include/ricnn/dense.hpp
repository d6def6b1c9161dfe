#pragma once

#include "ricnn/conic_conv.hpp"
#include "ricnn/tensor.hpp"

namespace ricnn {

/// Fully-connected layer a' = f(W x + c).
template <typename T>
struct DenseLayer {
  Tensor<T> weights;  // out x in
  Tensor<T> bias;     // out
  Activation activation = Activation::ReLU;

  static DenseLayer zeros(std::size_t inputs, std::size_t outputs, Activation activation);

  std::size_t inputs() const { return weights.extent(1); }
  std::size_t outputs() const { return weights.extent(0); }
  std::size_t parameter_count() const { return weights.size() + bias.size(); }
};

template <typename T>
struct DenseCache {
  Tensor<T> input;
  Tensor<T> pre_activation;
};

/// `x` is read as a flat vector in row-major order, whatever its shape.
template <typename T>
Tensor<T> fc_forward(const Tensor<T>& x, const DenseLayer<T>& layer, DenseCache<T>* cache = nullptr);

template <typename T>
struct DenseGrads {
  Tensor<T> input;  // shaped like the forward input
  Tensor<T> weights;
  Tensor<T> bias;
};

template <typename T>
DenseGrads<T> fc_backward(const Tensor<T>& grad_out, const DenseLayer<T>& layer, const DenseCache<T>& cache);

/// a' = f(W z' + c) on a flattened invariant vector.
template <typename T>
Tensor<T> fc_head(const Tensor<T>& z, const Tensor<T>& weights, const Tensor<T>& bias, Activation f) {
  return fc_forward(z, DenseLayer<T>{weights, bias, f});
}

}  // namespace ricnn
