#include "ricnn/train.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <numeric>

#include "ricnn/errors.hpp"

namespace ricnn {

namespace {

std::string format_double(const char* fmt, double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, fmt, v);
  return buf;
}

std::size_t argmax(const double* v, std::size_t n) {
  std::size_t best = 0;
  for (std::size_t i = 1; i < n; ++i) {
    if (v[i] > v[best]) best = i;
  }
  return best;
}

}  // namespace

void validate(const TrainConfig& config) {
  if (config.batch_size < 1) throw ValidationError("batch_size must be >= 1");
  if (!(config.learning_rate > 0.0) || !std::isfinite(config.learning_rate)) {
    throw ValidationError("learning_rate must be > 0");
  }
  if (!(config.weight_decay >= 0.0) || !std::isfinite(config.weight_decay)) {
    throw ValidationError("weight_decay must be >= 0");
  }
  if (config.max_steps < 1) throw ValidationError("max_steps must be >= 1");
  if (config.eval_every < 1) throw ValidationError("eval_every must be >= 1");
  if (config.augment.max_jitter < 0) throw ValidationError("max_jitter must be >= 0");
}

template <typename T>
void sgd_step(const std::vector<ParamRef<T>>& params, const std::vector<Tensor<T>>& grads, double learning_rate,
              double weight_decay) {
  if (params.size() != grads.size()) {
    throw ValidationError("sgd_step: " + std::to_string(params.size()) + " parameters but " +
                          std::to_string(grads.size()) + " gradients");
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    if (params[i].value->shape() != grads[i].shape()) {
      throw ValidationError("sgd_step: gradient shape " + to_string(grads[i].shape()) + " does not match " +
                            params[i].name + " " + to_string(params[i].value->shape()));
    }
    for (T g : grads[i].values()) {
      if (!std::isfinite(static_cast<double>(g))) {
        throw NumericError("sgd_step: non-finite gradient for " + params[i].name + "; step skipped");
      }
    }
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    auto p = params[i].value->values();
    auto g = grads[i].values();
    const double wd = params[i].decay ? weight_decay : 0.0;
    for (std::size_t j = 0; j < p.size(); ++j) {
      const double pj = p[j];
      p[j] = static_cast<T>(pj - learning_rate * (static_cast<double>(g[j]) + wd * pj));
    }
  }
}

std::pair<Tensor<float>, std::uint32_t> augment(const Tensor<float>& image, std::uint32_t label, Rng& rng,
                                                const AugmentConfig& config) {
  Tensor<float> out = image;
  if (config.rotations) out = rot90(out, static_cast<int>(rng.below(4)));
  if (config.max_jitter > 0) {
    const int dx = static_cast<int>(rng.between(-config.max_jitter, config.max_jitter));
    const int dy = static_cast<int>(rng.between(-config.max_jitter, config.max_jitter));
    out = translate(out, dx, dy);
  }
  return {std::move(out), label};
}

template <typename T>
TrainResult<T> train(Model<T>& model, const LabeledDataset& train_set, const LabeledDataset* eval_set,
                     const TrainConfig& config, const ProgressFn& progress) {
  validate(config);
  train_set.validate();
  if (train_set.classes > model.config().classes) {
    throw ValidationError("dataset has " + std::to_string(train_set.classes) + " classes but the model outputs " +
                          std::to_string(model.config().classes));
  }
  const LabeledDataset& eval = eval_set ? *eval_set : train_set;

  const Rng root(config.seed);
  Rng order_rng = root.split(1);
  Rng augment_rng = root.split(2);
  Rng dropout_rng = root.split(3);

  TrainResult<T> result;
  result.best_eval_accuracy = -1.0;
  std::vector<std::size_t> order;
  std::size_t cursor = 0;
  double loss_sum = 0.0;
  std::size_t loss_batches = 0;

  auto params = model.parameters();
  std::vector<Tensor<T>> grad_sum;
  grad_sum.reserve(params.size());
  for (const auto& p : params) grad_sum.emplace_back(p.value->shape(), T{0});

  typename Model<T>::Cache cache;
  for (std::size_t step = 1; step <= config.max_steps; ++step) {
    for (auto& g : grad_sum) g.fill(T{0});
    double batch_loss = 0.0;
    for (std::size_t b = 0; b < config.batch_size; ++b) {
      if (cursor == order.size()) {
        order = order_rng.permutation(train_set.size());
        cursor = 0;
      }
      const std::size_t idx = order[cursor++];
      auto [image, label] = augment(train_set.image(idx), train_set.labels[idx], augment_rng, config.augment);
      const auto input = model.prepare_input(image);
      const auto logits = model.forward(input, cache, &dropout_rng);
      const auto ce = cross_entropy(logits, label);
      if (!std::isfinite(ce.loss)) {
        throw NumericError("non-finite loss at step " + std::to_string(step) + " (example " + std::to_string(idx) +
                           ")");
      }
      batch_loss += ce.loss;
      Tensor<T> grad_logits(logits.shape(), T{0});
      for (std::size_t c = 0; c < ce.grad.size(); ++c) grad_logits[c] = static_cast<T>(ce.grad[c]);
      const auto grads = model.backward(grad_logits, cache);
      for (std::size_t i = 0; i < grads.size(); ++i) add_inplace(grad_sum[i], grads[i]);
    }
    const T inv = static_cast<T>(1.0 / static_cast<double>(config.batch_size));
    for (auto& g : grad_sum) {
      for (auto& v : g.values()) v *= inv;
    }
    sgd_step(params, grad_sum, config.learning_rate, config.weight_decay);
    loss_sum += batch_loss / static_cast<double>(config.batch_size);
    ++loss_batches;

    if (step % config.eval_every == 0 || step == config.max_steps) {
      const double acc = evaluate(model, eval).accuracy;
      MetricRow row{step, loss_sum / static_cast<double>(loss_batches), acc};
      result.log.push_back(row);
      if (acc > result.best_eval_accuracy) {
        result.best_eval_accuracy = acc;
        result.best_step = step;
        result.best_parameters.clear();
        for (const auto& p : params) result.best_parameters.push_back(*p.value);
      }
      loss_sum = 0.0;
      loss_batches = 0;
      if (progress) progress(row);
    }
  }
  return result;
}

void write_metrics_csv(const std::filesystem::path& path, const std::vector<MetricRow>& log) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "step,loss,eval_acc\n";
  for (const auto& row : log) {
    out << row.step << ',' << format_double("%.9g", row.loss) << ',' << format_double("%.6f", row.eval_acc) << '\n';
  }
  if (!out) throw IoError("error writing " + path.string());
}

EvalResult evaluate_scores(const Tensor<double>& scores, const std::vector<std::uint32_t>& labels,
                           std::size_t classes) {
  const std::size_t n = labels.size();
  if (n == 0) throw ValidationError("cannot evaluate an empty dataset");
  if (scores.rank() != 2 || scores.extent(0) != n || scores.extent(1) != classes) {
    throw ValidationError("score matrix " + to_string(scores.shape()) + " does not match " + std::to_string(n) +
                          " examples x " + std::to_string(classes) + " classes");
  }
  const double nan = std::numeric_limits<double>::quiet_NaN();
  EvalResult r;
  r.count = n;
  r.per_class_count.assign(classes, 0);
  std::vector<std::size_t> correct(classes, 0);
  std::size_t total_correct = 0;
  for (std::size_t i = 0; i < n; ++i) {
    if (labels[i] >= classes) throw ValidationError("label " + std::to_string(labels[i]) + " out of range");
    const bool hit = argmax(scores.data() + i * classes, classes) == labels[i];
    ++r.per_class_count[labels[i]];
    correct[labels[i]] += hit;
    total_correct += hit;
  }
  r.accuracy = static_cast<double>(total_correct) / static_cast<double>(n);

  r.per_class_accuracy.assign(classes, nan);
  r.per_class_ap.assign(classes, nan);
  std::vector<std::size_t> rank(n);
  double ap_sum = 0.0;
  std::size_t ap_classes = 0;
  for (std::size_t c = 0; c < classes; ++c) {
    if (r.per_class_count[c] == 0) continue;
    r.per_class_accuracy[c] = static_cast<double>(correct[c]) / static_cast<double>(r.per_class_count[c]);
    std::iota(rank.begin(), rank.end(), std::size_t{0});
    std::stable_sort(rank.begin(), rank.end(), [&](std::size_t a, std::size_t b) {
      return scores.data()[a * classes + c] > scores.data()[b * classes + c];
    });
    std::size_t hits = 0;
    double precision_sum = 0.0;
    for (std::size_t k = 0; k < n; ++k) {
      if (labels[rank[k]] == c) {
        ++hits;
        precision_sum += static_cast<double>(hits) / static_cast<double>(k + 1);
      }
    }
    r.per_class_ap[c] = precision_sum / static_cast<double>(hits);
    ap_sum += r.per_class_ap[c];
    ++ap_classes;
  }
  r.mean_ap = ap_sum / static_cast<double>(ap_classes);
  return r;
}

template <typename T>
Tensor<double> predict_scores(const Model<T>& model, const LabeledDataset& data) {
  if (data.size() == 0) throw ValidationError("cannot evaluate an empty dataset");
  const std::size_t classes = model.config().classes;
  Tensor<double> scores({data.size(), classes}, 0.0);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto logits = model.forward(model.prepare_input(data.image(i)));
    double m = -std::numeric_limits<double>::infinity();
    for (std::size_t c = 0; c < classes; ++c) m = std::max(m, static_cast<double>(logits[c]));
    double z = 0.0;
    double* row = scores.data() + i * classes;
    for (std::size_t c = 0; c < classes; ++c) {
      row[c] = std::exp(static_cast<double>(logits[c]) - m);
      z += row[c];
    }
    for (std::size_t c = 0; c < classes; ++c) row[c] /= z;
  }
  return scores;
}

template <typename T>
EvalResult evaluate(const Model<T>& model, const LabeledDataset& data) {
  if (data.classes > model.config().classes) {
    throw ValidationError("dataset has " + std::to_string(data.classes) + " classes but the model outputs " +
                          std::to_string(model.config().classes));
  }
  return evaluate_scores(predict_scores(model, data), data.labels, model.config().classes);
}

void write_per_class_csv(const std::filesystem::path& path, const EvalResult& result) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << "class,count,accuracy,average_precision\n";
  for (std::size_t c = 0; c < result.per_class_count.size(); ++c) {
    out << c << ',' << result.per_class_count[c] << ',' << format_double("%.6f", result.per_class_accuracy[c]) << ','
        << format_double("%.6f", result.per_class_ap[c]) << '\n';
  }
  if (!out) throw IoError("error writing " + path.string());
}

#define RICNN_INSTANTIATE(T)                                                                                    \
  template void sgd_step<T>(const std::vector<ParamRef<T>>&, const std::vector<Tensor<T>>&, double, double);   \
  template TrainResult<T> train<T>(Model<T>&, const LabeledDataset&, const LabeledDataset*, const TrainConfig&, \
                                   const ProgressFn&);                                                         \
  template Tensor<double> predict_scores<T>(const Model<T>&, const LabeledDataset&);                            \
  template EvalResult evaluate<T>(const Model<T>&, const LabeledDataset&);

RICNN_INSTANTIATE(float)
RICNN_INSTANTIATE(double)
#undef RICNN_INSTANTIATE

}  // namespace ricnn
