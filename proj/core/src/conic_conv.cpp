#include "ricnn/conic_conv.hpp"

#include <algorithm>
#include <limits>

namespace ricnn {

std::string to_string(Activation act) { return act == Activation::ReLU ? "relu" : "identity"; }

Activation parse_activation(const std::string& name) {
  if (name == "relu") return Activation::ReLU;
  if (name == "identity") return Activation::Identity;
  throw ValidationError("unknown activation '" + name + "'");
}

std::size_t conic_output_extent(std::size_t m, int downsample) {
  if (downsample < 1) throw ValidationError("downsample must be >= 1");
  const std::size_t d = static_cast<std::size_t>(downsample);
  return 2 * ((m - 1) / (2 * d)) + 1;
}

template <typename T>
ConicConvLayer<T> ConicConvLayer<T>::zeros(const ConicConvSpec& spec, std::size_t depth) {
  if (spec.filters < 1) throw ValidationError("conic layer needs at least one filter");
  if (spec.kernel < 1 || spec.kernel % 2 == 0) {
    throw ValidationError("conic layer kernel must be odd, got " + std::to_string(spec.kernel));
  }
  if (spec.subdivisions < 1) throw ValidationError("subdivisions must be >= 1");
  if (spec.downsample < 1) throw ValidationError("downsample must be >= 1");
  if (depth < 1) throw ValidationError("input depth must be >= 1");
  const auto k = static_cast<std::size_t>(spec.filters);
  const auto h = static_cast<std::size_t>(spec.kernel);
  return ConicConvLayer{spec, Tensor<T>({k, h, h, depth}), Tensor<T>({k})};
}

namespace {

// Correlation of filter f (h x h x d) with a (m x m x d) centred at (ci, cj).
template <typename T>
T window_dot(const T* a, long m, long d, const T* f, long h, long ci, long cj) {
  const long half = (h - 1) / 2;
  const long u0 = std::max(0L, half - ci), u1 = std::min(h, m - ci + half);
  const long v0 = std::max(0L, half - cj), v1 = std::min(h, m - cj + half);
  if (v1 <= v0) return T{0};
  const long len = (v1 - v0) * d;
  T acc{0};
  for (long u = u0; u < u1; ++u) {
    const T* arow = a + ((ci + u - half) * m + (cj + v0 - half)) * d;
    const T* frow = f + (u * h + v0) * d;
    for (long t = 0; t < len; ++t) acc += arow[t] * frow[t];
  }
  return acc;
}

// dst_a window += g * f ; dst_f += g * a window.
template <typename T>
void window_backprop(const T* a, T* grad_a, long m, long d, const T* f, T* grad_f, long h, long ci, long cj, T g) {
  const long half = (h - 1) / 2;
  const long u0 = std::max(0L, half - ci), u1 = std::min(h, m - ci + half);
  const long v0 = std::max(0L, half - cj), v1 = std::min(h, m - cj + half);
  if (v1 <= v0) return;
  const long len = (v1 - v0) * d;
  for (long u = u0; u < u1; ++u) {
    const long aoff = ((ci + u - half) * m + (cj + v0 - half)) * d;
    const long foff = (u * h + v0) * d;
    const T* arow = a + aoff;
    T* garow = grad_a + aoff;
    const T* frow = f + foff;
    T* gfrow = grad_f + foff;
    for (long t = 0; t < len; ++t) {
      garow[t] += g * frow[t];
      gfrow[t] += g * arow[t];
    }
  }
}

template <typename T>
Tensor<T> filter_slice(const Tensor<T>& filters, std::size_t k) {
  const std::size_t h = filters.extent(1), d = filters.extent(3);
  const std::size_t n = h * h * d;
  std::vector<T> data(filters.data() + k * n, filters.data() + (k + 1) * n);
  return Tensor<T>({h, h, d}, std::move(data));
}

int rotation_count(const ConicConvSpec& spec) {
  return spec.mode == ConvMode::Standard ? 1 : 4 * spec.subdivisions;
}

std::vector<FilterRotation> rotation_bank(const ConicConvSpec& spec) {
  std::vector<FilterRotation> bank;
  const auto h = static_cast<std::size_t>(spec.kernel);
  for (int s = 0; s < rotation_count(spec); ++s) {
    bank.push_back(make_region_rotation(h, h, s, spec.subdivisions, spec.interp));
  }
  return bank;
}

// Rotated copies of every filter, indexed [k * rotations + s].
template <typename T>
std::vector<Tensor<T>> rotated_filters(const ConicConvLayer<T>& layer, const std::vector<FilterRotation>& bank) {
  std::vector<Tensor<T>> out;
  const auto K = layer.filters.extent(0);
  out.reserve(K * bank.size());
  for (std::size_t k = 0; k < K; ++k) {
    const auto f = filter_slice(layer.filters, k);
    for (const auto& rot : bank) out.push_back(rot.apply(f));
  }
  return out;
}

// Rotation indices pooled at a pixel with the given label, ascending.
void candidates(const RegionLabel& label, const ConicConvSpec& spec, std::vector<int>& out) {
  out.clear();
  if (spec.mode == ConvMode::Standard) {
    out.push_back(0);
    return;
  }
  const int rotations = 4 * spec.subdivisions;
  switch (label.kind) {
    case RegionKind::Cone:
      out.push_back(label.index);
      break;
    case RegionKind::Boundary: {
      const int next = (label.index + 1) % rotations;
      out.push_back(std::min(label.index, next));
      out.push_back(std::max(label.index, next));
      break;
    }
    case RegionKind::Origin: {
      const int count = spec.origin == OriginPooling::AllRotations ? rotations : spec.subdivisions;
      for (int r = 0; r < count; ++r) out.push_back(r);
      break;
    }
  }
}

template <typename T>
T activate(Activation act, T x) {
  return act == Activation::ReLU ? std::max(x, T{0}) : x;
}

template <typename T>
void validate_input(const Tensor<T>& a, const ConicConvLayer<T>& layer, const RegionMap& map) {
  if (a.rank() != 3) throw ValidationError("conic layer expects an M x M x d input, got " + to_string(a.shape()));
  if (a.extent(0) != a.extent(1)) throw ValidationError("conic layer expects a square input");
  if (a.extent(0) % 2 == 0) {
    throw ValidationError("conic layer needs an odd spatial extent, got " + std::to_string(a.extent(0)));
  }
  if (a.extent(2) != layer.depth()) {
    throw ValidationError("conic layer depth mismatch: input " + std::to_string(a.extent(2)) + ", filters " +
                          std::to_string(layer.depth()));
  }
  if (layer.spec.downsample < 1) throw ValidationError("downsample must be >= 1");
  if (layer.spec.mode == ConvMode::Conic &&
      (map.size() != a.extent(0) || map.subdivisions() != layer.spec.subdivisions)) {
    throw ValidationError("region map does not match input extent / subdivisions");
  }
}

}  // namespace

template <typename T>
Tensor<T> region_conv(const Tensor<T>& a, const Tensor<T>& w, int r, const RegionMap& map, Interp scheme) {
  if (a.rank() != 3 || w.rank() != 3) throw ValidationError("region_conv expects rank-3 input and filter");
  if (a.extent(2) != w.extent(2)) {
    throw ValidationError("region_conv depth mismatch: input " + std::to_string(a.extent(2)) + ", filter " +
                          std::to_string(w.extent(2)));
  }
  if (w.extent(0) != w.extent(1)) throw ValidationError("region_conv expects a square filter");
  if (a.extent(0) != a.extent(1) || a.extent(0) != map.size()) {
    throw ValidationError("region_conv: input does not match region map");
  }
  const auto f = make_region_rotation(w.extent(0), w.extent(1), r, map.subdivisions(), scheme).apply(w);
  const long m = static_cast<long>(a.extent(0));
  const long d = static_cast<long>(a.extent(2));
  const long h = static_cast<long>(f.extent(0));
  Tensor<T> out({a.extent(0), a.extent(1)});
  for (long i = 0; i < m; ++i)
    for (long j = 0; j < m; ++j)
      out(i, j) = window_dot(a.data(), m, d, f.data(), h, i, j);
  return out;
}

template <typename T>
Tensor<T> conic_forward(const Tensor<T>& a, const ConicConvLayer<T>& layer, const RegionMap& map,
                        ConicConvCache<T>* cache) {
  validate_input(a, layer, map);
  const auto& spec = layer.spec;
  const auto bank = rotation_bank(spec);
  const auto rotated = rotated_filters(layer, bank);
  const int rotations = rotation_count(spec);

  const std::size_t m = a.extent(0);
  const long d = static_cast<long>(a.extent(2));
  const long h = static_cast<long>(spec.kernel);
  const std::size_t K = static_cast<std::size_t>(spec.filters);
  const std::size_t mo = conic_output_extent(m, spec.downsample);
  const long c_in = static_cast<long>((m - 1) / 2);
  const long stride = spec.downsample;

  Tensor<T> out({mo, mo, K});
  Tensor<T> pre;
  std::vector<std::uint16_t> selected;
  if (cache) {
    pre = Tensor<T>({mo, mo, K});
    selected.assign(mo * mo * K, 0);
  }

  std::vector<int> picks;
  for (std::size_t oi = 0; oi < mo; ++oi) {
    for (std::size_t oj = 0; oj < mo; ++oj) {
      const long ci = c_in + stride * centred(oi, mo);
      const long cj = c_in + stride * centred(oj, mo);
      const RegionLabel label = spec.mode == ConvMode::Conic ? map.at(static_cast<std::size_t>(ci), static_cast<std::size_t>(cj))
                                                             : RegionLabel::origin();
      candidates(label, spec, picks);
      for (std::size_t k = 0; k < K; ++k) {
        T best = -std::numeric_limits<T>::infinity();
        int chosen = picks.front();
        for (int s : picks) {
          const T v = window_dot(a.data(), static_cast<long>(m), d,
                                 rotated[k * static_cast<std::size_t>(rotations) + static_cast<std::size_t>(s)].data(), h,
                                 ci, cj);
          if (v > best) {
            best = v;
            chosen = s;
          }
        }
        const T z = best + layer.biases[k];
        const std::size_t idx = (oi * mo + oj) * K + k;
        out[idx] = activate(spec.activation, z);
        if (cache) {
          pre[idx] = z;
          selected[idx] = static_cast<std::uint16_t>(chosen);
        }
      }
    }
  }
  if (cache) {
    cache->input = a;
    cache->pre_activation = std::move(pre);
    cache->selected = std::move(selected);
  }
  return out;
}

template <typename T>
ConicConvGrads<T> conic_backward(const Tensor<T>& grad_out, const ConicConvLayer<T>& layer,
                                 const ConicConvCache<T>& cache) {
  const auto& spec = layer.spec;
  if (grad_out.shape() != cache.pre_activation.shape() || cache.selected.size() != grad_out.size()) {
    throw ValidationError("conic_backward: gradient " + to_string(grad_out.shape()) + " does not match cache " +
                          to_string(cache.pre_activation.shape()));
  }
  const auto& a = cache.input;
  if (a.rank() != 3 || a.extent(2) != layer.depth()) throw ValidationError("conic_backward: cache/layer mismatch");

  const auto bank = rotation_bank(spec);
  const auto rotated = rotated_filters(layer, bank);
  const std::size_t rotations = bank.size();
  const std::size_t m = a.extent(0);
  const long d = static_cast<long>(a.extent(2));
  const long h = static_cast<long>(spec.kernel);
  const std::size_t K = static_cast<std::size_t>(spec.filters);
  const std::size_t mo = grad_out.extent(0);
  const long c_in = static_cast<long>((m - 1) / 2);

  ConicConvGrads<T> grads{Tensor<T>(a.shape()), Tensor<T>(layer.filters.shape()), Tensor<T>(layer.biases.shape())};
  std::vector<Tensor<T>> grad_rotated;
  grad_rotated.reserve(rotated.size());
  for (const auto& f : rotated) grad_rotated.emplace_back(f.shape());
  std::vector<char> used(rotated.size(), 0);

  for (std::size_t oi = 0; oi < mo; ++oi) {
    for (std::size_t oj = 0; oj < mo; ++oj) {
      const long ci = c_in + spec.downsample * centred(oi, mo);
      const long cj = c_in + spec.downsample * centred(oj, mo);
      for (std::size_t k = 0; k < K; ++k) {
        const std::size_t idx = (oi * mo + oj) * K + k;
        T g = grad_out[idx];
        if (spec.activation == Activation::ReLU && !(cache.pre_activation[idx] > T{0})) g = T{0};
        if (g == T{0}) continue;
        grads.biases[k] += g;
        const std::size_t slot = k * rotations + cache.selected[idx];
        used[slot] = 1;
        window_backprop(a.data(), grads.input.data(), static_cast<long>(m), d, rotated[slot].data(),
                        grad_rotated[slot].data(), h, ci, cj, g);
      }
    }
  }

  const std::size_t per_filter = layer.filters.size() / K;
  for (std::size_t k = 0; k < K; ++k) {
    T* dst = grads.filters.data() + k * per_filter;
    for (std::size_t s = 0; s < rotations; ++s) {
      const std::size_t slot = k * rotations + s;
      if (!used[slot]) continue;
      const auto back = bank[s].apply_adjoint(grad_rotated[slot]);
      for (std::size_t t = 0; t < per_filter; ++t) dst[t] += back[t];
    }
  }
  return grads;
}

template struct ConicConvLayer<float>;
template struct ConicConvLayer<double>;
template Tensor<float> region_conv(const Tensor<float>&, const Tensor<float>&, int, const RegionMap&, Interp);
template Tensor<double> region_conv(const Tensor<double>&, const Tensor<double>&, int, const RegionMap&, Interp);
template Tensor<float> conic_forward(const Tensor<float>&, const ConicConvLayer<float>&, const RegionMap&,
                                     ConicConvCache<float>*);
template Tensor<double> conic_forward(const Tensor<double>&, const ConicConvLayer<double>&, const RegionMap&,
                                      ConicConvCache<double>*);
template ConicConvGrads<float> conic_backward(const Tensor<float>&, const ConicConvLayer<float>&,
                                              const ConicConvCache<float>&);
template ConicConvGrads<double> conic_backward(const Tensor<double>&, const ConicConvLayer<double>&,
                                               const ConicConvCache<double>&);

}  // namespace ricnn
