#include "ricnn/network.hpp"

#include <algorithm>
#include <cmath>

namespace ricnn {

std::string to_string(Architecture arch) {
  switch (arch) {
    case Architecture::Cnn: return "cnn";
    case Architecture::Recnn: return "recnn";
    case Architecture::Ricnn: break;
  }
  return "ricnn";
}

Architecture parse_architecture(const std::string& name) {
  if (name == "cnn") return Architecture::Cnn;
  if (name == "ricnn") return Architecture::Ricnn;
  if (name == "recnn") return Architecture::Recnn;
  throw ValidationError("unknown architecture '" + name + "' (expected cnn, ricnn or recnn)");
}

void validate(const ModelConfig& config) {
  if (config.input_extent < 1 || config.input_extent % 2 == 0) {
    throw ValidationError("model input extent must be odd, got " + std::to_string(config.input_extent));
  }
  if (config.input_channels < 1) throw ValidationError("model needs at least one input channel");
  if (config.classes < 1) throw ValidationError("model needs at least one class");
  if (!(config.dropout >= 0.0 && config.dropout < 1.0)) throw ValidationError("dropout must lie in [0, 1)");
  for (std::size_t i = 0; i < config.conv.size(); ++i) {
    const auto& c = config.conv[i];
    const std::string where = "conv layer " + std::to_string(i) + ": ";
    if (c.filters < 1) throw ValidationError(where + "filters must be >= 1");
    if (c.kernel < 1 || c.kernel % 2 == 0) throw ValidationError(where + "kernel must be odd");
    if (c.subdivisions < 1) throw ValidationError(where + "subdivisions must be >= 1");
    if (c.downsample < 1) throw ValidationError(where + "downsample must be >= 1");
    if (c.subdivisions * 4 > 65535) throw ValidationError(where + "too many subdivisions");
  }
  if (config.arch == Architecture::Ricnn) {
    if (config.transition.filters < 1) throw ValidationError("transition layer: filters must be >= 1");
    if (config.transition.subdivisions < 1) throw ValidationError("transition layer: subdivisions must be >= 1");
  }
  for (std::size_t i = 0; i < config.hidden.size(); ++i) {
    if (config.hidden[i] < 1) throw ValidationError("dense layer " + std::to_string(i) + ": width must be >= 1");
  }
}

namespace {

template <typename T>
void fill_uniform(Tensor<T>& t, std::size_t fan_in, Rng& rng) {
  const double bound = std::sqrt(3.0 / static_cast<double>(fan_in));
  for (auto& v : t.values()) v = static_cast<T>(rng.uniform(-bound, bound));
}

}  // namespace

template <typename T>
Model<T>::Model(ModelConfig config) : config_(std::move(config)) {
  validate(config_);
  std::size_t m = config_.input_extent;
  std::size_t depth = config_.input_channels;
  for (auto spec : config_.conv) {
    spec.mode = config_.arch == Architecture::Cnn ? ConvMode::Standard : ConvMode::Conic;
    conv_.push_back(ConicConvLayer<T>::zeros(spec, depth));
    maps_.push_back(spec.mode == ConvMode::Conic ? RegionMap(m, spec.subdivisions) : RegionMap{});
    m = conic_output_extent(m, spec.downsample);
    depth = static_cast<std::size_t>(spec.filters);
  }
  std::size_t flat = m * m * depth;
  if (config_.arch == Architecture::Ricnn) {
    transition_ = TransitionLayer<T>::zeros(config_.transition, m, depth);
    flat = transition_->weights.extent(0) * transition_->rotations();
  }
  for (auto width : config_.hidden) {
    dense_.push_back(DenseLayer<T>::zeros(flat, width, Activation::ReLU));
    flat = width;
  }
  dense_.push_back(DenseLayer<T>::zeros(flat, config_.classes, Activation::Identity));
}

template <typename T>
void Model<T>::initialize(std::uint64_t seed) {
  Rng rng(seed);
  for (auto& layer : conv_) {
    fill_uniform(layer.filters, layer.filters.size() / layer.filters.extent(0), rng);
    layer.biases.fill(T{0});
  }
  if (transition_) fill_uniform(transition_->weights, transition_->weights.size() / transition_->weights.extent(0), rng);
  for (auto& layer : dense_) {
    fill_uniform(layer.weights, layer.inputs(), rng);
    layer.bias.fill(T{0});
  }
}

template <typename T>
Tensor<T> Model<T>::prepare_input(const Tensor<float>& image) const {
  if (image.rank() != 3) throw ValidationError("model input must be H x W x C, got " + to_string(image.shape()));
  auto padded = pad_to_odd(image);
  if (padded.extent(0) != config_.input_extent || padded.extent(1) != config_.input_extent ||
      padded.extent(2) != config_.input_channels) {
    throw ValidationError("input " + to_string(image.shape()) + " does not match model input " +
                          std::to_string(config_.input_extent) + "x" + std::to_string(config_.input_extent) + "x" +
                          std::to_string(config_.input_channels));
  }
  return padded.template cast<T>();
}

template <typename T>
Tensor<T> Model<T>::forward(const Tensor<T>& input) const {
  Cache cache;
  return forward(input, cache, nullptr);
}

template <typename T>
Tensor<T> Model<T>::forward(const Tensor<T>& input, Cache& cache, Rng* dropout_rng) const {
  if (input.rank() != 3 || input.extent(0) != config_.input_extent || input.extent(1) != config_.input_extent ||
      input.extent(2) != config_.input_channels) {
    throw ValidationError("model input shape " + to_string(input.shape()) + " does not match config");
  }
  cache.conv.resize(conv_.size());
  cache.dense.resize(dense_.size());
  cache.dropout_masks.assign(dense_.size(), {});

  Tensor<T> x = input;
  for (std::size_t i = 0; i < conv_.size(); ++i) x = conic_forward(x, conv_[i], maps_[i], &cache.conv[i]);
  cache.flatten_shape = x.shape();
  if (transition_) x = invariant_forward(x, *transition_, &cache.transition);
  x = x.reshaped({x.size()});

  const double keep = 1.0 - config_.dropout;
  for (std::size_t i = 0; i < dense_.size(); ++i) {
    x = fc_forward(x, dense_[i], &cache.dense[i]);
    const bool hidden = i + 1 < dense_.size();
    if (hidden && dropout_rng && config_.dropout > 0.0) {
      auto& mask = cache.dropout_masks[i];
      mask.resize(x.size());
      const T scale = static_cast<T>(1.0 / keep);
      for (std::size_t j = 0; j < x.size(); ++j) {
        mask[j] = dropout_rng->uniform() < keep;
        x[j] = mask[j] ? x[j] * scale : T{0};
      }
    }
  }
  return x;
}

template <typename T>
std::vector<Tensor<T>> Model<T>::backward(const Tensor<T>& grad_logits, const Cache& cache) const {
  return backward(grad_logits, cache, nullptr);
}

template <typename T>
std::vector<Tensor<T>> Model<T>::backward(const Tensor<T>& grad_logits, const Cache& cache,
                                          Tensor<T>* grad_input) const {
  if (cache.dense.size() != dense_.size() || cache.conv.size() != conv_.size()) {
    throw ValidationError("model backward: cache does not come from this model");
  }
  std::vector<Tensor<T>> conv_grads(2 * conv_.size());
  Tensor<T> transition_grad;
  std::vector<Tensor<T>> dense_grads(2 * dense_.size());

  Tensor<T> g = grad_logits;
  const double keep = 1.0 - config_.dropout;
  for (std::size_t i = dense_.size(); i-- > 0;) {
    const auto& mask = cache.dropout_masks[i];
    if (!mask.empty()) {
      const T scale = static_cast<T>(1.0 / keep);
      for (std::size_t j = 0; j < g.size(); ++j) g[j] = mask[j] ? g[j] * scale : T{0};
    }
    auto dg = fc_backward(g, dense_[i], cache.dense[i]);
    dense_grads[2 * i] = std::move(dg.weights);
    dense_grads[2 * i + 1] = std::move(dg.bias);
    g = std::move(dg.input);
  }
  if (transition_) {
    auto tg = transition_backward(g.reshaped({transition_->weights.extent(0), transition_->rotations()}),
                                  *transition_, cache.transition);
    transition_grad = std::move(tg.weights);
    g = std::move(tg.input);
  } else {
    g = g.reshaped(cache.flatten_shape);
  }
  for (std::size_t i = conv_.size(); i-- > 0;) {
    auto cg = conic_backward(g, conv_[i], cache.conv[i]);
    conv_grads[2 * i] = std::move(cg.filters);
    conv_grads[2 * i + 1] = std::move(cg.biases);
    g = std::move(cg.input);
  }
  if (grad_input) *grad_input = std::move(g);

  std::vector<Tensor<T>> out;
  for (auto& t : conv_grads) out.push_back(std::move(t));
  if (transition_) out.push_back(std::move(transition_grad));
  for (auto& t : dense_grads) out.push_back(std::move(t));
  return out;
}

template <typename T>
std::vector<ParamRef<T>> Model<T>::parameters() {
  std::vector<ParamRef<T>> out;
  for (std::size_t i = 0; i < conv_.size(); ++i) {
    out.push_back({"conv" + std::to_string(i) + ".filters", &conv_[i].filters, true});
    out.push_back({"conv" + std::to_string(i) + ".biases", &conv_[i].biases, false});
  }
  if (transition_) out.push_back({"transition.weights", &transition_->weights, true});
  for (std::size_t i = 0; i < dense_.size(); ++i) {
    out.push_back({"dense" + std::to_string(i) + ".weights", &dense_[i].weights, true});
    out.push_back({"dense" + std::to_string(i) + ".bias", &dense_[i].bias, false});
  }
  return out;
}

template <typename T>
std::vector<ConstParamRef<T>> Model<T>::parameters() const {
  std::vector<ConstParamRef<T>> out;
  for (auto& p : const_cast<Model*>(this)->parameters()) out.push_back({p.name, p.value, p.decay});
  return out;
}

template <typename T>
std::size_t Model<T>::parameter_count() const {
  std::size_t n = 0;
  for (const auto& p : parameters()) n += p.value->size();
  return n;
}

std::size_t count_parameters(const ModelConfig& config) { return Model<float>(config).parameter_count(); }

ModelConfig match_parameters(const ModelConfig& reference, Architecture arch, double tolerance) {
  const double target = static_cast<double>(count_parameters(reference));
  if (arch == reference.arch) return reference;

  const double scales[] = {1.0, 0.9, 1.1, 0.8, 1.2, 0.7, 1.3, 0.6, 1.5, 0.5, 1.75, 0.4, 2.0, 0.3, 2.5, 3.0};
  ModelConfig best;
  double best_err = -1.0;
  for (double s : scales) {
    ModelConfig cand = reference;
    cand.arch = arch;
    for (auto& c : cand.conv) c.filters = std::max(1, static_cast<int>(std::lround(c.filters * s)));
    if (!cand.hidden.empty()) {
      cand.hidden[0] = 1;
      const double c1 = static_cast<double>(count_parameters(cand));
      cand.hidden[0] = 2;
      const double slope = static_cast<double>(count_parameters(cand)) - c1;
      const double width = std::round((target - (c1 - slope)) / slope);
      cand.hidden[0] = static_cast<std::size_t>(std::clamp(width, 1.0, 8192.0));
    }
    const double err = std::abs(static_cast<double>(count_parameters(cand)) - target) / target;
    if (best_err < 0.0 || err < best_err) {
      best = cand;
      best_err = err;
    }
    if (err <= tolerance) return cand;
  }
  throw ValidationError("could not match " + to_string(arch) + " to " + std::to_string(static_cast<long>(target)) +
                        " parameters within " + std::to_string(tolerance * 100) + "% (best " +
                        std::to_string(best_err * 100) + "%)");
}

template <typename T>
LossResult cross_entropy(const Tensor<T>& logits, std::size_t label) {
  if (label >= logits.size()) {
    throw ValidationError("label " + std::to_string(label) + " out of range for " + std::to_string(logits.size()) +
                          " classes");
  }
  // log-sum-exp around the largest logit as m + log1p(sum of the others), so
  // a confidently correct prediction keeps its small loss to full precision.
  std::size_t top = 0;
  for (std::size_t i = 1; i < logits.size(); ++i) {
    if (logits[i] > logits[top]) top = i;
  }
  const double mx = static_cast<double>(logits[top]);
  double rest = 0.0;
  for (std::size_t i = 0; i < logits.size(); ++i) {
    if (i != top) rest += std::exp(static_cast<double>(logits[i]) - mx);
  }
  const double log1p_rest = std::log1p(rest);
  LossResult out{(mx - static_cast<double>(logits[label])) + log1p_rest, std::vector<double>(logits.size())};
  for (std::size_t i = 0; i < logits.size(); ++i) {
    out.grad[i] = std::exp(static_cast<double>(logits[i]) - mx) / (1.0 + rest) - (i == label ? 1.0 : 0.0);
  }
  return out;
}

template class Model<float>;
template class Model<double>;
template LossResult cross_entropy(const Tensor<float>&, std::size_t);
template LossResult cross_entropy(const Tensor<double>&, std::size_t);

}  // namespace ricnn
