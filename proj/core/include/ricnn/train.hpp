#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <utility>
#include <vector>

#include "ricnn/dataset.hpp"
#include "ricnn/network.hpp"
#include "ricnn/rng.hpp"

namespace ricnn {

struct AugmentConfig {
  bool rotations = true;  // uniform quarter turn
  int max_jitter = 3;     // integer translation in [-J, J]^2, zero fill

  bool operator==(const AugmentConfig&) const = default;
};

struct TrainConfig {
  std::size_t batch_size = 50;
  double learning_rate = 5e-3;
  double weight_decay = 5e-4;
  std::size_t max_steps = 3000;
  AugmentConfig augment;
  std::size_t eval_every = 250;
  std::uint64_t seed = 0;

  bool operator==(const TrainConfig&) const = default;
};

void validate(const TrainConfig& config);

/// p <- p - lr (g + wd p), with wd applied only to parameters marked for
/// decay. Throws NumericError, leaving every parameter untouched, if any
/// gradient entry is non-finite.
template <typename T>
void sgd_step(const std::vector<ParamRef<T>>& params, const std::vector<Tensor<T>>& grads, double learning_rate,
              double weight_decay);

/// Random quarter turn then random translation; the label passes through.
std::pair<Tensor<float>, std::uint32_t> augment(const Tensor<float>& image, std::uint32_t label, Rng& rng,
                                                const AugmentConfig& config);

struct MetricRow {
  std::size_t step;
  double loss;      // mean training loss since the previous row
  double eval_acc;  // accuracy on the evaluation set after `step` updates
};

template <typename T>
struct TrainResult {
  std::vector<MetricRow> log;
  double best_eval_accuracy = 0.0;
  std::size_t best_step = 0;
  std::vector<Tensor<T>> best_parameters;  // snapshot at best_step
};

/// Called after each metric row; used for progress output.
using ProgressFn = std::function<void(const MetricRow&)>;

/// Minibatch SGD. Batches walk seeded permutations of the training set,
/// drawing a new permutation once one is used up. Rows are logged every
/// `eval_every` steps and after the last step. `eval` defaults to the
/// training set when null.
template <typename T>
TrainResult<T> train(Model<T>& model, const LabeledDataset& train_set, const LabeledDataset* eval_set,
                     const TrainConfig& config, const ProgressFn& progress = {});

/// Header `step,loss,eval_acc`, fixed-format numbers.
void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricRow>& log);

struct EvalResult {
  std::size_t count = 0;
  double accuracy = 0.0;
  std::vector<double> per_class_accuracy;  // NaN for classes with no examples
  std::vector<double> per_class_ap;        // NaN for classes with no examples
  double mean_ap = 0.0;                    // over classes that have examples
  std::vector<std::size_t> per_class_count;
};

/// Accuracy and average precision from an N x C score matrix. AP for class c
/// ranks all examples by score c (ties broken by index) and averages the
/// precision at the rank of each positive.
EvalResult evaluate_scores(const Tensor<double>& scores, const std::vector<std::uint32_t>& labels,
                           std::size_t classes);

/// Softmax scores of `model` on every example.
template <typename T>
Tensor<double> predict_scores(const Model<T>& model, const LabeledDataset& data);

template <typename T>
EvalResult evaluate(const Model<T>& model, const LabeledDataset& data);

/// class,count,accuracy,average_precision
void write_per_class_csv(const std::filesystem::path& path, const EvalResult& result);

}  // namespace ricnn
