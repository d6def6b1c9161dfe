#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include "ricnn/conic_conv.hpp"
#include "ricnn/dense.hpp"
#include "ricnn/geometry.hpp"
#include "ricnn/rng.hpp"
#include "ricnn/tensor.hpp"
#include "ricnn/transition.hpp"

namespace ricnn {

/// cnn: raster convolutions, flatten, dense.
/// ricnn: conic convolutions, rotated-weight transition, |2D-DFT|, dense.
/// recnn: conic convolutions, flatten, dense (no invariant transition).
enum class Architecture : std::uint8_t { Cnn, Ricnn, Recnn };

std::string to_string(Architecture arch);
Architecture parse_architecture(const std::string& name);

struct ModelConfig {
  Architecture arch = Architecture::Ricnn;
  std::size_t input_extent = 51;  // odd, after padding
  std::size_t input_channels = 1;
  std::vector<ConicConvSpec> conv;
  TransitionSpec transition;          // used by ricnn only
  std::vector<std::size_t> hidden;    // dense ReLU widths before the output layer
  std::size_t classes = 10;
  double dropout = 0.0;               // drop probability on hidden dense outputs while training

  bool operator==(const ModelConfig&) const = default;
};

/// Throws ValidationError naming the offending layer.
void validate(const ModelConfig& config);

template <typename T>
struct ParamRef {
  std::string name;
  Tensor<T>* value;
  bool decay;  // biases are excluded from weight decay
};

template <typename T>
struct ConstParamRef {
  std::string name;
  const Tensor<T>* value;
  bool decay;
};

template <typename T>
class Model {
 public:
  /// All parameters zero.
  explicit Model(ModelConfig config);

  /// Weights ~ U(-sqrt(3 / fan_in), sqrt(3 / fan_in)) (zero mean, standard
  /// deviation 1/sqrt(fan_in)); biases zero.
  void initialize(std::uint64_t seed);

  const ModelConfig& config() const { return config_; }

  struct Cache {
    std::vector<ConicConvCache<T>> conv;
    TransitionCache<T> transition;
    Shape flatten_shape;
    std::vector<DenseCache<T>> dense;
    std::vector<std::vector<char>> dropout_masks;
  };

  /// Pads to odd and casts an image (H x W x C) to the model's input.
  Tensor<T> prepare_input(const Tensor<float>& image) const;

  Tensor<T> forward(const Tensor<T>& input) const;

  /// Training forward. Dropout is applied only when `dropout_rng` is given.
  Tensor<T> forward(const Tensor<T>& input, Cache& cache, Rng* dropout_rng = nullptr) const;

  /// Gradients in parameters() order.
  std::vector<Tensor<T>> backward(const Tensor<T>& grad_logits, const Cache& cache) const;

  /// Gradient with respect to the input as well (used by gradient checks).
  std::vector<Tensor<T>> backward(const Tensor<T>& grad_logits, const Cache& cache, Tensor<T>* grad_input) const;

  std::vector<ParamRef<T>> parameters();
  std::vector<ConstParamRef<T>> parameters() const;
  std::size_t parameter_count() const;

  const std::vector<ConicConvLayer<T>>& conv_layers() const { return conv_; }
  const std::optional<TransitionLayer<T>>& transition() const { return transition_; }
  const std::vector<DenseLayer<T>>& dense_layers() const { return dense_; }

 private:
  ModelConfig config_;
  std::vector<ConicConvLayer<T>> conv_;
  std::vector<RegionMap> maps_;
  std::optional<TransitionLayer<T>> transition_;
  std::vector<DenseLayer<T>> dense_;
};

std::size_t count_parameters(const ModelConfig& config);

/// Config of architecture `arch` whose parameter count is as close as
/// possible to `reference`'s: conv filter counts are scaled and the first
/// hidden width searched. Throws if no candidate lands within `tolerance`.
ModelConfig match_parameters(const ModelConfig& reference, Architecture arch, double tolerance = 0.10);

struct LossResult {
  double loss;
  std::vector<double> grad;  // d loss / d logits
};

/// -log softmax(logits)[label] with max-subtraction.
template <typename T>
LossResult cross_entropy(const Tensor<T>& logits, std::size_t label);

}  // namespace ricnn
