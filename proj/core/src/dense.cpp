#include "ricnn/dense.hpp"

#include <algorithm>

namespace ricnn {

template <typename T>
DenseLayer<T> DenseLayer<T>::zeros(std::size_t inputs, std::size_t outputs, Activation activation) {
  if (inputs < 1 || outputs < 1) throw ValidationError("dense layer extents must be >= 1");
  return DenseLayer{Tensor<T>({outputs, inputs}), Tensor<T>({outputs}), activation};
}

template <typename T>
Tensor<T> fc_forward(const Tensor<T>& x, const DenseLayer<T>& layer, DenseCache<T>* cache) {
  const std::size_t n_in = layer.inputs(), n_out = layer.outputs();
  if (x.size() != n_in) {
    throw ValidationError("dense layer expects " + std::to_string(n_in) + " inputs, got " + to_string(x.shape()));
  }
  Tensor<T> pre({n_out});
  const T* w = layer.weights.data();
  for (std::size_t o = 0; o < n_out; ++o) {
    T acc = layer.bias[o];
    const T* row = w + o * n_in;
    for (std::size_t i = 0; i < n_in; ++i) acc += row[i] * x[i];
    pre[o] = acc;
  }
  Tensor<T> out = pre;
  if (layer.activation == Activation::ReLU) {
    for (auto& v : out.values()) v = std::max(v, T{0});
  }
  if (cache) {
    cache->input = x;
    cache->pre_activation = std::move(pre);
  }
  return out;
}

template <typename T>
DenseGrads<T> fc_backward(const Tensor<T>& grad_out, const DenseLayer<T>& layer, const DenseCache<T>& cache) {
  const std::size_t n_in = layer.inputs(), n_out = layer.outputs();
  if (grad_out.size() != n_out || cache.input.size() != n_in) {
    throw ValidationError("dense backward: gradient/cache shape mismatch");
  }
  DenseGrads<T> g{Tensor<T>(cache.input.shape()), Tensor<T>(layer.weights.shape()), Tensor<T>(layer.bias.shape())};
  for (std::size_t o = 0; o < n_out; ++o) {
    T go = grad_out[o];
    if (layer.activation == Activation::ReLU && !(cache.pre_activation[o] > T{0})) go = T{0};
    if (go == T{0}) continue;
    g.bias[o] = go;
    const T* row = layer.weights.data() + o * n_in;
    T* grow = g.weights.data() + o * n_in;
    for (std::size_t i = 0; i < n_in; ++i) {
      grow[i] = go * cache.input[i];
      g.input[i] += go * row[i];
    }
  }
  return g;
}

template struct DenseLayer<float>;
template struct DenseLayer<double>;
template Tensor<float> fc_forward(const Tensor<float>&, const DenseLayer<float>&, DenseCache<float>*);
template Tensor<double> fc_forward(const Tensor<double>&, const DenseLayer<double>&, DenseCache<double>*);
template DenseGrads<float> fc_backward(const Tensor<float>&, const DenseLayer<float>&, const DenseCache<float>&);
template DenseGrads<double> fc_backward(const Tensor<double>&, const DenseLayer<double>&, const DenseCache<double>&);

}  // namespace ricnn
