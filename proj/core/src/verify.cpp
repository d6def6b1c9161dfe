#include "ricnn/verify.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>

#include "ricnn/conic_conv.hpp"
#include "ricnn/dense.hpp"
#include "ricnn/dft.hpp"
#include "ricnn/gradcheck.hpp"
#include "ricnn/network.hpp"
#include "ricnn/rng.hpp"
#include "ricnn/transition.hpp"

namespace ricnn {

namespace {

using Clock = std::chrono::steady_clock;

// Suite-specific stream keys so suites do not share random instances.
enum StreamKey : std::uint64_t {
  kEquivariance = 1,
  kInvariance64,
  kInvariance32,
  kTransitionShift,
  kDftOracle,
  kDftShift,
  kLemma,
  kGradConic,
  kGradStandard,
  kGradTransition,
  kGradDft,
  kGradDense,
  kGradLoss,
  kGradModel,
};

Rng instance_rng(const VerifyOptions& o, StreamKey suite, std::uint64_t index) {
  return Rng(o.seed).split(mix64(suite) ^ index);
}

Tensor<double> randn(const Shape& shape, Rng& rng, double scale = 1.0) {
  Tensor<double> t(shape, 0.0);
  for (auto& v : t.values()) v = scale * rng.normal();
  return t;
}

Interp random_interp(Rng& rng) { return rng.below(2) ? Interp::Bilinear : Interp::Nearest; }

class Timer {
 public:
  explicit Timer(SuiteResult& r) : r_(r), start_(Clock::now()) {}
  ~Timer() { r_.seconds = std::chrono::duration<double>(Clock::now() - start_).count(); }

 private:
  SuiteResult& r_;
  Clock::time_point start_;
};

void record(SuiteResult& r, double err) {
  ++r.checks;
  if (!(err <= r.max_error)) r.max_error = std::isnan(err) ? INFINITY : err;
}

void finish(SuiteResult& r) { r.passed = r.checks > 0 && r.max_error < r.tolerance; }

ConicConvSpec random_conv_spec(Rng& rng, int subdivisions, int downsample, bool perturb) {
  ConicConvSpec s;
  s.filters = 1 + static_cast<int>(rng.below(3));
  s.kernel = 1 + 2 * static_cast<int>(rng.below(3));
  s.subdivisions = subdivisions;
  s.downsample = downsample;
  s.activation = rng.below(2) ? Activation::ReLU : Activation::Identity;
  s.interp = random_interp(rng);
  s.origin = perturb ? OriginPooling::FirstQuadrant : OriginPooling::AllRotations;
  return s;
}

ConicConvLayer<double> random_conv_layer(const ConicConvSpec& spec, std::size_t depth, Rng& rng) {
  auto layer = ConicConvLayer<double>::zeros(spec, depth);
  layer.filters = randn(layer.filters.shape(), rng);
  layer.biases = randn(layer.biases.shape(), rng, 0.5);
  return layer;
}

ModelConfig random_model_config(Rng& rng, bool perturb, std::size_t max_half_extent) {
  ModelConfig c;
  c.arch = Architecture::Ricnn;
  c.input_channels = 1 + rng.below(2);
  c.input_extent = 2 * static_cast<std::size_t>(rng.between(3, static_cast<long>(max_half_extent))) + 1;
  const std::size_t layers = 1 + rng.below(2);
  for (std::size_t i = 0; i < layers; ++i) {
    auto s = random_conv_spec(rng, 1 + static_cast<int>(rng.below(3)), 1 + static_cast<int>(rng.below(2)), perturb);
    s.activation = Activation::ReLU;
    c.conv.push_back(s);
  }
  c.transition.filters = 1 + static_cast<int>(rng.below(4));
  c.transition.subdivisions = 1 + static_cast<int>(rng.below(3));
  c.transition.interp = random_interp(rng);
  if (rng.below(2)) c.hidden = {2 + rng.below(4)};
  c.classes = 2 + rng.below(4);
  return c;
}

template <typename T>
void randomize_biases(Model<T>& model, Rng& rng) {
  for (auto& p : model.parameters()) {
    if (p.decay) continue;
    for (auto& v : p.value->values()) v = static_cast<T>(0.1 * rng.normal());
  }
}

double dot(const Tensor<double>& a, const Tensor<double>& b) {
  double s = 0.0;
  for (std::size_t i = 0; i < a.size(); ++i) s += a[i] * b[i];
  return s;
}

template <typename T>
SuiteResult verify_invariance(const VerifyOptions& o, StreamKey key, const char* name, double tol) {
  SuiteResult r{name, "logits(rot90(x, n)) == logits(x), relative to max |logit|"};
  r.tolerance = tol;
  Timer timer(r);
  for (std::size_t i = 0; i < o.instances; ++i) {
    Rng rng = instance_rng(o, key, i);
    const auto config = random_model_config(rng, o.perturb_origin, 10);
    Model<T> model(config);
    model.initialize(rng.next_u64());
    randomize_biases(model, rng);
    Tensor<T> x({config.input_extent, config.input_extent, config.input_channels}, T{0});
    for (auto& v : x.values()) v = static_cast<T>(rng.uniform());
    const auto base = model.forward(x);
    const double scale = std::max(max_abs(base), 1e-30);
    for (int n = 1; n < 4; ++n) record(r, max_abs_diff(model.forward(rot90(x, n)), base) / scale);
    ++r.instances;
  }
  finish(r);
  return r;
}

// Compares analytic against central differences for one tensor argument.
struct GradCheck {
  SuiteResult& r;

  void compare(const Tensor<double>& analytic, const ScalarFn& f, const SignatureFn& sig, const Tensor<double>& x) {
    const auto fd = finite_diff_grad_checked(f, sig, x, kGradStep);
    const double floor = kGradFloorFraction * std::max(max_abs(analytic), 1e-12);
    for (std::size_t i = 0; i < x.size(); ++i) {
      if (!fd.usable[i]) {
        ++r.excluded;
        continue;
      }
      record(r, relative_error(analytic[i], fd.gradient[i], floor));
    }
  }
};

std::vector<int> conv_signature(const ConicConvLayer<double>& layer, const RegionMap& map, const Tensor<double>& x) {
  ConicConvCache<double> cache;
  conic_forward(x, layer, map, &cache);
  std::vector<int> sig(cache.selected.begin(), cache.selected.end());
  if (layer.spec.activation == Activation::ReLU) {
    for (double v : cache.pre_activation.values()) sig.push_back(v > 0.0);
  }
  return sig;
}

SuiteResult grad_conv(const VerifyOptions& o, ConvMode mode) {
  const bool conic = mode == ConvMode::Conic;
  const StreamKey key = conic ? kGradConic : kGradStandard;
  SuiteResult r{conic ? "grad-conic-conv" : "grad-standard-conv", "conic_backward vs central differences"};
  r.tolerance = 1e-5;
  Timer timer(r);
  GradCheck check{r};
  for (std::size_t i = 0; i < o.instances; ++i) {
    Rng rng = instance_rng(o, key, i);
    auto spec = random_conv_spec(rng, 1 + static_cast<int>(rng.below(3)), 1 + static_cast<int>(rng.below(2)), false);
    spec.mode = mode;
    const std::size_t depth = 1 + rng.below(2);
    const std::size_t m = 2 * static_cast<std::size_t>(rng.between(2, 4)) + 1;
    const RegionMap map(m, spec.subdivisions);
    const auto layer = random_conv_layer(spec, depth, rng);
    const auto x = randn({m, m, depth}, rng);
    ConicConvCache<double> cache;
    const auto y = conic_forward(x, layer, map, &cache);
    const auto g = randn(y.shape(), rng);
    const auto grads = conic_backward(g, layer, cache);

    check.compare(
        grads.input, [&](const Tensor<double>& v) { return dot(g, conic_forward(v, layer, map)); },
        [&](const Tensor<double>& v) { return conv_signature(layer, map, v); }, x);
    auto probe = layer;
    check.compare(
        grads.filters,
        [&](const Tensor<double>& v) {
          probe.filters = v;
          return dot(g, conic_forward(x, probe, map));
        },
        [&](const Tensor<double>& v) {
          probe.filters = v;
          return conv_signature(probe, map, x);
        },
        layer.filters);
    probe = layer;
    check.compare(
        grads.biases,
        [&](const Tensor<double>& v) {
          probe.biases = v;
          return dot(g, conic_forward(x, probe, map));
        },
        [&](const Tensor<double>& v) {
          probe.biases = v;
          return conv_signature(probe, map, x);
        },
        layer.biases);
    ++r.instances;
  }
  finish(r);
  return r;
}

std::vector<int> no_kinks(const Tensor<double>&) { return {}; }

double min_magnitude(const Tensor<double>& z) {
  const auto mag = dft2_magnitude(z);
  double m = INFINITY;
  for (double v : mag.values()) m = std::min(m, v);
  return m;
}

SuiteResult grad_transition(const VerifyOptions& o) {
  SuiteResult r{"grad-transition", "transition_backward (through |DFT|) vs central differences"};
  r.tolerance = 1e-5;
  Timer timer(r);
  GradCheck check{r};
  for (std::size_t i = 0; i < o.instances; ++i) {
    Rng rng = instance_rng(o, kGradTransition, i);
    TransitionSpec spec{1 + static_cast<int>(rng.below(3)), 1 + static_cast<int>(rng.below(3)), random_interp(rng)};
    const std::size_t m = 2 * static_cast<std::size_t>(rng.between(1, 3)) + 1;
    const std::size_t depth = 1 + rng.below(2);
    auto layer = TransitionLayer<double>::zeros(spec, m, depth);
    Tensor<double> x;
    // |.| has a kink at zero: redraw until every bin is clear of it.
    do {
      layer.weights = randn(layer.weights.shape(), rng);
      x = randn({m, m, depth}, rng);
    } while (min_magnitude(transition_forward(x, layer)) <= 1e-3);
    TransitionCache<double> cache;
    const auto y = invariant_forward(x, layer, &cache);
    const auto g = randn(y.shape(), rng);
    const auto grads = transition_backward(g, layer, cache);
    check.compare(
        grads.input, [&](const Tensor<double>& v) { return dot(g, invariant_forward(v, layer)); }, no_kinks, x);
    auto probe = layer;
    check.compare(
        grads.weights,
        [&](const Tensor<double>& v) {
          probe.weights = v;
          return dot(g, invariant_forward(x, probe));
        },
        no_kinks, layer.weights);
    ++r.instances;
  }
  finish(r);
  return r;
}

SuiteResult grad_dft(const VerifyOptions& o) {
  SuiteResult r{"grad-dft-magnitude", "dft2_magnitude_backward vs central differences"};
  r.tolerance = 1e-5;
  Timer timer(r);
  GradCheck check{r};
  for (std::size_t i = 0; i < o.instances; ++i) {
    Rng rng = instance_rng(o, kGradDft, i);
    const Shape shape{1 + rng.below(6), 4 * (1 + rng.below(3))};
    Tensor<double> z;
    do {
      z = randn(shape, rng);
    } while (min_magnitude(z) <= 1e-3);
    Spectrum spectrum;
    const auto y = dft2_magnitude(z, &spectrum);
    const auto g = randn(y.shape(), rng);
    check.compare(
        dft2_magnitude_backward(g, spectrum), [&](const Tensor<double>& v) { return dot(g, dft2_magnitude(v)); },
        no_kinks, z);
    ++r.instances;
  }
  finish(r);
  return r;
}

SuiteResult grad_dense(const VerifyOptions& o) {
  SuiteResult r{"grad-dense", "fc_backward vs central differences"};
  r.tolerance = 1e-5;
  Timer timer(r);
  GradCheck check{r};
  for (std::size_t i = 0; i < o.instances; ++i) {
    Rng rng = instance_rng(o, kGradDense, i);
    const std::size_t in = 1 + rng.below(12), out = 1 + rng.below(6);
    auto layer = DenseLayer<double>::zeros(in, out, rng.below(2) ? Activation::ReLU : Activation::Identity);
    layer.weights = randn(layer.weights.shape(), rng);
    layer.bias = randn(layer.bias.shape(), rng);
    const auto x = randn({in}, rng);
    DenseCache<double> cache;
    const auto y = fc_forward(x, layer, &cache);
    const auto g = randn(y.shape(), rng);
    const auto grads = fc_backward(g, layer, cache);
    auto probe = layer;
    auto sig_of = [&](const Tensor<double>& input, const DenseLayer<double>& l) {
      DenseCache<double> c;
      fc_forward(input, l, &c);
      std::vector<int> s;
      if (l.activation == Activation::ReLU) {
        for (double v : c.pre_activation.values()) s.push_back(v > 0.0);
      }
      return s;
    };
    check.compare(
        grads.input, [&](const Tensor<double>& v) { return dot(g, fc_forward(v, layer)); },
        [&](const Tensor<double>& v) { return sig_of(v, layer); }, x);
    check.compare(
        grads.weights,
        [&](const Tensor<double>& v) {
          probe.weights = v;
          return dot(g, fc_forward(x, probe));
        },
        [&](const Tensor<double>& v) {
          probe.weights = v;
          return sig_of(x, probe);
        },
        layer.weights);
    probe = layer;
    check.compare(
        grads.bias,
        [&](const Tensor<double>& v) {
          probe.bias = v;
          return dot(g, fc_forward(x, probe));
        },
        [&](const Tensor<double>& v) {
          probe.bias = v;
          return sig_of(x, probe);
        },
        layer.bias);
    ++r.instances;
  }
  finish(r);
  return r;
}

SuiteResult grad_loss(const VerifyOptions& o) {
  SuiteResult r{"grad-cross-entropy", "cross_entropy gradient vs central differences"};
  r.tolerance = 1e-5;
  Timer timer(r);
  GradCheck check{r};
  for (std::size_t i = 0; i < o.instances; ++i) {
    Rng rng = instance_rng(o, kGradLoss, i);
    const std::size_t classes = 2 + rng.below(9);
    const std::size_t label = rng.below(classes);
    const auto logits = randn({classes}, rng, 3.0);
    const auto ce = cross_entropy(logits, label);
    const Tensor<double> analytic({classes}, ce.grad);
    check.compare(
        analytic, [&](const Tensor<double>& v) { return cross_entropy(v, label).loss; }, no_kinks, logits);
    ++r.instances;
  }
  finish(r);
  return r;
}

std::vector<int> model_signature(const Model<double>& model, const Tensor<double>& x) {
  Model<double>::Cache cache;
  model.forward(x, cache);
  std::vector<int> sig;
  for (std::size_t i = 0; i < cache.conv.size(); ++i) {
    sig.insert(sig.end(), cache.conv[i].selected.begin(), cache.conv[i].selected.end());
    if (model.conv_layers()[i].spec.activation == Activation::ReLU) {
      for (double v : cache.conv[i].pre_activation.values()) sig.push_back(v > 0.0);
    }
  }
  for (std::size_t i = 0; i < cache.dense.size(); ++i) {
    if (model.dense_layers()[i].activation == Activation::ReLU) {
      for (double v : cache.dense[i].pre_activation.values()) sig.push_back(v > 0.0);
    }
  }
  return sig;
}

SuiteResult grad_model(const VerifyOptions& o) {
  SuiteResult r{"grad-model", "Model::backward (all parameters and input) vs central differences"};
  r.tolerance = 1e-5;
  Timer timer(r);
  GradCheck check{r};
  for (std::size_t i = 0, attempt = 0; i < o.instances; ++attempt) {
    Rng rng = instance_rng(o, kGradModel, attempt);
    auto config = random_model_config(rng, false, 4);
    if (rng.below(3) == 0) config.arch = rng.below(2) ? Architecture::Cnn : Architecture::Recnn;
    Model<double> model(config);
    model.initialize(rng.next_u64());
    randomize_biases(model, rng);
    Tensor<double> x({config.input_extent, config.input_extent, config.input_channels}, 0.0);
    for (auto& v : x.values()) v = rng.uniform();
    if (config.arch == Architecture::Ricnn) {
      Model<double>::Cache probe_cache;
      model.forward(x, probe_cache);
      const auto& z = probe_cache.transition.grid;
      if (min_magnitude(z) <= 1e-3) continue;  // too close to the |.| kink
    }
    Model<double>::Cache cache;
    const auto logits = model.forward(x, cache);
    const auto g = randn(logits.shape(), rng);
    Tensor<double> grad_input;
    const auto grads = model.backward(g, cache, &grad_input);
    check.compare(
        grad_input, [&](const Tensor<double>& v) { return dot(g, model.forward(v)); },
        [&](const Tensor<double>& v) { return model_signature(model, v); }, x);
    auto params = model.parameters();
    for (std::size_t p = 0; p < params.size(); ++p) {
      const Tensor<double> original = *params[p].value;
      Tensor<double>* slot = params[p].value;
      check.compare(
          grads[p],
          [&](const Tensor<double>& v) {
            *slot = v;
            return dot(g, model.forward(x));
          },
          [&](const Tensor<double>& v) {
            *slot = v;
            return model_signature(model, x);
          },
          original);
      *slot = original;
    }
    ++r.instances;
    ++i;
  }
  finish(r);
  return r;
}

}  // namespace

SuiteResult verify_equivariance(const VerifyOptions& o) {
  SuiteResult r{"equivariance", "conic_forward(rot90(x, n)) == rot90(conic_forward(x), n)"};
  r.tolerance = 1e-9;
  Timer timer(r);
  std::size_t index = 0;
  for (int R = 1; R <= 3; ++R) {
    for (int D = 1; D <= 2; ++D) {
      for (std::size_t i = 0; i < o.instances; ++i, ++index) {
        Rng rng = instance_rng(o, kEquivariance, index);
        const auto spec = random_conv_spec(rng, R, D, o.perturb_origin);
        const std::size_t depth = 1 + rng.below(3);
        const std::size_t m = 2 * static_cast<std::size_t>(rng.between(2, 7)) + 1;
        const RegionMap map(m, R);
        const auto layer = random_conv_layer(spec, depth, rng);
        const auto x = randn({m, m, depth}, rng);
        const auto y = conic_forward(x, layer, map);
        for (int n = 0; n < 4; ++n) record(r, max_abs_diff(conic_forward(rot90(x, n), layer, map), rot90(y, n)));
        ++r.instances;
      }
    }
  }
  finish(r);
  return r;
}

SuiteResult verify_invariance_f64(const VerifyOptions& o) {
  return verify_invariance<double>(o, kInvariance64, "invariance-f64", 1e-9);
}

SuiteResult verify_invariance_f32(const VerifyOptions& o) {
  return verify_invariance<float>(o, kInvariance32, "invariance-f32", 1e-4);
}

SuiteResult verify_transition_shift(const VerifyOptions& o) {
  SuiteResult r{"transition-shift", "z(rot90(a, n)) == circular_shift(z(a), -nR)"};
  r.tolerance = 1e-9;
  Timer timer(r);
  for (std::size_t i = 0; i < o.instances; ++i) {
    Rng rng = instance_rng(o, kTransitionShift, i);
    TransitionSpec spec{1 + static_cast<int>(rng.below(4)), 1 + static_cast<int>(rng.below(4)), random_interp(rng)};
    const std::size_t m = 2 * static_cast<std::size_t>(rng.between(1, 5)) + 1;
    const std::size_t depth = 1 + rng.below(3);
    auto layer = TransitionLayer<double>::zeros(spec, m, depth);
    layer.weights = randn(layer.weights.shape(), rng);
    const auto a = randn({m, m, depth}, rng);
    const auto z = transition_forward(a, layer);
    for (int n = 0; n < 4; ++n) {
      const auto expected = circular_shift(z, 1, -static_cast<long>(n) * spec.subdivisions);
      record(r, max_abs_diff(transition_forward(rot90(a, n), layer), expected));
    }
    ++r.instances;
  }
  finish(r);
  return r;
}

SuiteResult verify_dft_oracle(const VerifyOptions& o) {
  SuiteResult r{"dft-oracle", "dft2 and |dft2| match the double-sum oracle"};
  r.tolerance = 1e-10;
  Timer timer(r);
  for (std::size_t i = 0; i < o.instances; ++i) {
    Rng rng = instance_rng(o, kDftOracle, i);
    const Shape shape{std::size_t{1} << rng.below(6), std::size_t{1} << rng.below(6)};
    const auto z = randn(shape, rng);
    const auto fast = dft2(z), slow = dft2_naive(z);
    double err = 0.0;
    for (std::size_t k = 0; k < fast.values.size(); ++k) err = std::max(err, std::abs(fast.values[k] - slow.values[k]));
    record(r, err);
    record(r, max_abs_diff(dft2_magnitude(z), dft2_magnitude_naive(z)));
    ++r.instances;
  }
  finish(r);
  return r;
}

SuiteResult verify_dft_shift(const VerifyOptions& o) {
  SuiteResult r{"dft-shift", "|dft2(shift(z))| == |dft2(z)| for every circular shift"};
  r.tolerance = 1e-10;
  Timer timer(r);
  for (std::size_t i = 0; i < o.instances; ++i) {
    Rng rng = instance_rng(o, kDftShift, i);
    const Shape shape{1 + rng.below(8), 1 + rng.below(16)};
    const auto z = randn(shape, rng);
    const auto base = dft2_magnitude(z);
    for (std::size_t a = 0; a < shape[0]; ++a) {
      const auto za = circular_shift(z, 0, static_cast<long>(a));
      for (std::size_t b = 0; b < shape[1]; ++b) {
        record(r, max_abs_diff(dft2_magnitude(circular_shift(za, 1, static_cast<long>(b))), base));
      }
    }
    ++r.instances;
  }
  finish(r);
  return r;
}

SuiteResult verify_lemma(const VerifyOptions& o) {
  SuiteResult r{"lemma", "rot90(a * b) == rot90(a) * rot90(b), exact"};
  r.tolerance = 0.0;
  Timer timer(r);
  bool exact = true;
  for (std::size_t i = 0; i < o.instances; ++i) {
    Rng rng = instance_rng(o, kLemma, i);
    const Shape shape{1 + rng.below(9), 1 + rng.below(9), 1 + rng.below(3)};
    const auto a = randn(shape, rng), b = randn(shape, rng);
    for (int n = 0; n < 4; ++n) {
      const bool same = rot90(hadamard(a, b), n) == hadamard(rot90(a, n), rot90(b, n));
      exact = exact && same;
      record(r, same ? 0.0 : max_abs_diff(rot90(hadamard(a, b), n), hadamard(rot90(a, n), rot90(b, n))) + 1e-300);
    }
    ++r.instances;
  }
  r.passed = r.checks > 0 && exact;
  return r;
}

std::vector<SuiteResult> verify_gradients(const VerifyOptions& o) {
  return {grad_conv(o, ConvMode::Conic), grad_conv(o, ConvMode::Standard), grad_transition(o), grad_dft(o),
          grad_dense(o), grad_loss(o), grad_model(o)};
}

std::vector<SuiteResult> run_all_suites(const VerifyOptions& o) {
  std::vector<SuiteResult> out{verify_equivariance(o), verify_invariance_f64(o), verify_invariance_f32(o),
                               verify_transition_shift(o), verify_dft_oracle(o), verify_dft_shift(o),
                               verify_lemma(o)};
  for (auto& g : verify_gradients(o)) out.push_back(std::move(g));
  return out;
}

std::string format_report(const std::vector<SuiteResult>& results, const VerifyOptions& o, bool timings) {
  std::string s;
  char line[256];
  std::snprintf(line, sizeof line, "verify seed=%llu instances=%zu perturb_origin=%s\n",
                static_cast<unsigned long long>(o.seed), o.instances, o.perturb_origin ? "yes" : "no");
  s += line;
  std::snprintf(line, sizeof line, "%-20s %9s %9s %9s %11s %9s %6s", "suite", "instances", "checks", "excluded",
                "max_error", "tolerance", "result");
  s += line;
  s += timings ? "  seconds\n" : "\n";
  std::size_t failed = 0;
  for (const auto& r : results) {
    std::snprintf(line, sizeof line, "%-20s %9zu %9zu %9zu %11.3e %9.0e %6s", r.name.c_str(), r.instances, r.checks,
                  r.excluded, r.max_error, r.tolerance, r.passed ? "PASS" : "FAIL");
    s += line;
    if (timings) {
      std::snprintf(line, sizeof line, " %8.2f", r.seconds);
      s += line;
    }
    s += '\n';
    failed += !r.passed;
  }
  std::snprintf(line, sizeof line, "%zu of %zu suites passed\n", results.size() - failed, results.size());
  s += line;
  return s;
}

}  // namespace ricnn
