#include "ricnn/transition.hpp"

#include <algorithm>

namespace ricnn {

template <typename T>
TransitionLayer<T> TransitionLayer<T>::zeros(const TransitionSpec& spec, std::size_t extent, std::size_t depth) {
  if (spec.filters < 1) throw ValidationError("transition needs at least one filter");
  if (spec.subdivisions < 1) throw ValidationError("subdivisions must be >= 1");
  if (extent % 2 == 0) throw ValidationError("transition input extent must be odd");
  return TransitionLayer{spec, Tensor<T>({static_cast<std::size_t>(spec.filters), extent, extent, depth})};
}

namespace {

template <typename T>
Tensor<T> weight_slice(const Tensor<T>& weights, std::size_t k) {
  const std::size_t n = weights.size() / weights.extent(0);
  std::vector<T> data(weights.data() + k * n, weights.data() + (k + 1) * n);
  return Tensor<T>({weights.extent(1), weights.extent(2), weights.extent(3)}, std::move(data));
}

template <typename T>
void validate(const Tensor<T>& a, const TransitionLayer<T>& layer) {
  const auto& w = layer.weights;
  if (a.rank() != 3 || w.rank() != 4 || a.extent(0) != w.extent(1) || a.extent(1) != w.extent(2) ||
      a.extent(2) != w.extent(3)) {
    throw ValidationError("transition: input " + to_string(a.shape()) + " does not match weights " +
                          to_string(w.shape()));
  }
}

template <typename T>
std::vector<FilterRotation> rotations_for(const TransitionLayer<T>& layer) {
  std::vector<FilterRotation> bank;
  const auto m = layer.weights.extent(1);
  for (std::size_t r = 0; r < layer.rotations(); ++r) {
    bank.push_back(make_region_rotation(m, m, static_cast<int>(r), layer.spec.subdivisions, layer.spec.interp));
  }
  return bank;
}

template <typename T>
T inner(const Tensor<T>& x, const Tensor<T>& y) {
  T acc{0};
  for (std::size_t i = 0; i < x.size(); ++i) acc += x[i] * y[i];
  return acc;
}

}  // namespace

template <typename T>
Tensor<T> transition_forward(const Tensor<T>& a, const TransitionLayer<T>& layer, TransitionCache<T>* cache) {
  validate(a, layer);
  const auto bank = rotations_for(layer);
  const std::size_t K = layer.weights.extent(0);
  Tensor<T> z({K, bank.size()});
  for (std::size_t k = 0; k < K; ++k) {
    const auto omega = weight_slice(layer.weights, k);
    for (std::size_t r = 0; r < bank.size(); ++r) z(k, r) = inner(bank[r].apply(omega), a);
  }
  if (cache) {
    cache->input = a;
    cache->grid = z;
  }
  return z;
}

template <typename T>
Tensor<T> invariant_forward(const Tensor<T>& a, const TransitionLayer<T>& layer, TransitionCache<T>* cache) {
  const auto z = transition_forward(a, layer, cache);
  return dft2_magnitude(z, cache ? &cache->spectrum : nullptr);
}

template <typename T>
TransitionGrads<T> shift_grid_backward(const Tensor<T>& grad_grid, const TransitionLayer<T>& layer,
                                       const TransitionCache<T>& cache) {
  validate(cache.input, layer);
  const auto bank = rotations_for(layer);
  const std::size_t K = layer.weights.extent(0);
  if (grad_grid.rank() != 2 || grad_grid.extent(0) != K || grad_grid.extent(1) != bank.size()) {
    throw ValidationError("transition backward: gradient shape " + to_string(grad_grid.shape()) + " mismatch");
  }
  TransitionGrads<T> grads{Tensor<T>(cache.input.shape()), Tensor<T>(layer.weights.shape())};
  const std::size_t per = layer.weights.size() / K;
  for (std::size_t k = 0; k < K; ++k) {
    const auto omega = weight_slice(layer.weights, k);
    Tensor<T> gw_rot(omega.shape());
    for (std::size_t r = 0; r < bank.size(); ++r) {
      const T g = grad_grid(k, r);
      if (g == T{0}) continue;
      add_inplace(grads.input, bank[r].apply(omega), g);
      // d z(k,r) / d rotated = a; pull back through the rotation.
      add_inplace(gw_rot, bank[r].apply_adjoint(cache.input), g);
    }
    std::copy(gw_rot.data(), gw_rot.data() + per, grads.weights.data() + k * per);
  }
  return grads;
}

template <typename T>
TransitionGrads<T> transition_backward(const Tensor<T>& grad_invariant, const TransitionLayer<T>& layer,
                                       const TransitionCache<T>& cache) {
  if (cache.spectrum.values.size() != cache.grid.size()) {
    throw ValidationError("transition_backward: cache has no spectrum (use invariant_forward)");
  }
  const auto grad_grid = dft2_magnitude_backward(grad_invariant, cache.spectrum);
  return shift_grid_backward(grad_grid, layer, cache);
}

template struct TransitionLayer<float>;
template struct TransitionLayer<double>;
template Tensor<float> transition_forward(const Tensor<float>&, const TransitionLayer<float>&, TransitionCache<float>*);
template Tensor<double> transition_forward(const Tensor<double>&, const TransitionLayer<double>&,
                                           TransitionCache<double>*);
template Tensor<float> invariant_forward(const Tensor<float>&, const TransitionLayer<float>&, TransitionCache<float>*);
template Tensor<double> invariant_forward(const Tensor<double>&, const TransitionLayer<double>&,
                                          TransitionCache<double>*);
template TransitionGrads<float> shift_grid_backward(const Tensor<float>&, const TransitionLayer<float>&,
                                                    const TransitionCache<float>&);
template TransitionGrads<double> shift_grid_backward(const Tensor<double>&, const TransitionLayer<double>&,
                                                     const TransitionCache<double>&);
template TransitionGrads<float> transition_backward(const Tensor<float>&, const TransitionLayer<float>&,
                                                    const TransitionCache<float>&);
template TransitionGrads<double> transition_backward(const Tensor<double>&, const TransitionLayer<double>&,
                                                     const TransitionCache<double>&);

}  // namespace ricnn
