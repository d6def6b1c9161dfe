#include "ricnn/config.hpp"

#include <fstream>
#include <set>

#include "ricnn/errors.hpp"

namespace ricnn {

using nlohmann::json;

namespace {

// Reads known keys into existing defaults and rejects anything else.
class Reader {
 public:
  explicit Reader(const json& j) : j_(j) {
    if (!j.is_object()) throw ValidationError("expected an object");
  }

  template <typename T>
  void get(const char* key, T& out) {
    seen_.insert(key);
    auto it = j_.find(key);
    if (it == j_.end()) return;
    try {
      out = it->template get<T>();
    } catch (const json::exception& e) {
      throw ValidationError(std::string(key) + ": " + e.what());
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(key) + "." + e.what());
    }
  }

  template <typename T>
  void get_with(const char* key, T& out, T (*parse)(const std::string&)) {
    std::string s;
    seen_.insert(key);
    if (!j_.contains(key)) return;
    get(key, s);
    try {
      out = parse(s);
    } catch (const ValidationError& e) {
      throw ValidationError(std::string(key) + ": " + e.what());
    }
  }

  void finish() const {
    for (const auto& [k, v] : j_.items()) {
      if (!seen_.count(k)) throw ValidationError("unknown key '" + k + "'");
    }
  }

 private:
  const json& j_;
  std::set<std::string> seen_;
};

std::string mode_name(ConvMode m) { return m == ConvMode::Conic ? "conic" : "standard"; }

ConvMode parse_mode(const std::string& s) {
  if (s == "conic") return ConvMode::Conic;
  if (s == "standard") return ConvMode::Standard;
  throw ValidationError("unknown conv mode '" + s + "' (expected conic or standard)");
}

std::string origin_name(OriginPooling o) {
  return o == OriginPooling::AllRotations ? "all_rotations" : "first_quadrant";
}

OriginPooling parse_origin(const std::string& s) {
  if (s == "all_rotations") return OriginPooling::AllRotations;
  if (s == "first_quadrant") return OriginPooling::FirstQuadrant;
  throw ValidationError("unknown origin pooling '" + s + "' (expected all_rotations or first_quadrant)");
}

}  // namespace

std::string to_string(Precision p) { return p == Precision::F32 ? "f32" : "f64"; }

Precision parse_precision(const std::string& name) {
  if (name == "f32") return Precision::F32;
  if (name == "f64") return Precision::F64;
  throw ValidationError("unknown precision '" + name + "' (expected f32 or f64)");
}

void to_json(json& j, const ConicConvSpec& v) {
  j = {{"filters", v.filters},
       {"kernel", v.kernel},
       {"subdivisions", v.subdivisions},
       {"downsample", v.downsample},
       {"activation", to_string(v.activation)},
       {"interp", to_string(v.interp)},
       {"mode", mode_name(v.mode)},
       {"origin", origin_name(v.origin)}};
}

void from_json(const json& j, ConicConvSpec& v) {
  Reader r(j);
  r.get("filters", v.filters);
  r.get("kernel", v.kernel);
  r.get("subdivisions", v.subdivisions);
  r.get("downsample", v.downsample);
  r.get_with("activation", v.activation, parse_activation);
  r.get_with("interp", v.interp, parse_interp);
  r.get_with("mode", v.mode, parse_mode);
  r.get_with("origin", v.origin, parse_origin);
  r.finish();
}

void to_json(json& j, const TransitionSpec& v) {
  j = {{"filters", v.filters}, {"subdivisions", v.subdivisions}, {"interp", to_string(v.interp)}};
}

void from_json(const json& j, TransitionSpec& v) {
  Reader r(j);
  r.get("filters", v.filters);
  r.get("subdivisions", v.subdivisions);
  r.get_with("interp", v.interp, parse_interp);
  r.finish();
}

void to_json(json& j, const ModelConfig& v) {
  j = {{"arch", to_string(v.arch)},
       {"input_extent", v.input_extent},
       {"input_channels", v.input_channels},
       {"conv", v.conv},
       {"transition", v.transition},
       {"hidden", v.hidden},
       {"classes", v.classes},
       {"dropout", v.dropout}};
}

void from_json(const json& j, ModelConfig& v) {
  Reader r(j);
  r.get_with("arch", v.arch, parse_architecture);
  r.get("input_extent", v.input_extent);
  r.get("input_channels", v.input_channels);
  r.get("conv", v.conv);
  r.get("transition", v.transition);
  r.get("hidden", v.hidden);
  r.get("classes", v.classes);
  r.get("dropout", v.dropout);
  r.finish();
}

void to_json(json& j, const AugmentConfig& v) { j = {{"rotations", v.rotations}, {"max_jitter", v.max_jitter}}; }

void from_json(const json& j, AugmentConfig& v) {
  Reader r(j);
  r.get("rotations", v.rotations);
  r.get("max_jitter", v.max_jitter);
  r.finish();
}

void to_json(json& j, const TrainConfig& v) {
  j = {{"batch_size", v.batch_size},     {"learning_rate", v.learning_rate}, {"weight_decay", v.weight_decay},
       {"max_steps", v.max_steps},       {"augment", v.augment},             {"eval_every", v.eval_every},
       {"seed", v.seed}};
}

void from_json(const json& j, TrainConfig& v) {
  Reader r(j);
  r.get("batch_size", v.batch_size);
  r.get("learning_rate", v.learning_rate);
  r.get("weight_decay", v.weight_decay);
  r.get("max_steps", v.max_steps);
  r.get("augment", v.augment);
  r.get("eval_every", v.eval_every);
  r.get("seed", v.seed);
  r.finish();
}

void to_json(json& j, const GenParams& v) {
  j = {{"image_size", v.image_size},
       {"background_rate", v.background_rate},
       {"mean_jitter", v.mean_jitter},
       {"count_std", v.count_std},
       {"intensity_center", v.intensity_center},
       {"intensity_half_range", v.intensity_half_range},
       {"psf_variance", v.psf_variance},
       {"noise_rate", v.noise_rate},
       {"max_jitter", v.max_jitter},
       {"margin", v.margin}};
}

void from_json(const json& j, GenParams& v) {
  Reader r(j);
  r.get("image_size", v.image_size);
  r.get("background_rate", v.background_rate);
  r.get("mean_jitter", v.mean_jitter);
  r.get("count_std", v.count_std);
  r.get("intensity_center", v.intensity_center);
  r.get("intensity_half_range", v.intensity_half_range);
  r.get("psf_variance", v.psf_variance);
  r.get("noise_rate", v.noise_rate);
  r.get("max_jitter", v.max_jitter);
  r.get("margin", v.margin);
  r.finish();
}

void to_json(json& j, const GaussianComponent& v) {
  j = {{"mean", v.mean}, {"covariance", v.covariance}, {"expected_count", v.expected_count}};
}

void from_json(const json& j, GaussianComponent& v) {
  Reader r(j);
  r.get("mean", v.mean);
  r.get("covariance", v.covariance);
  r.get("expected_count", v.expected_count);
  r.finish();
}

void to_json(json& j, const ClassSpec& v) { j = {{"gaussians", v.gaussians}}; }

void from_json(const json& j, ClassSpec& v) {
  Reader r(j);
  r.get("gaussians", v.gaussians);
  r.finish();
}

void to_json(json& j, const GenerateConfig& v) {
  j = {{"classes", v.classes},
       {"gaussians", v.gaussians},
       {"train_per_class", v.train_per_class},
       {"test_per_class", v.test_per_class},
       {"params", v.params}};
}

void from_json(const json& j, GenerateConfig& v) {
  Reader r(j);
  r.get("classes", v.classes);
  r.get("gaussians", v.gaussians);
  r.get("train_per_class", v.train_per_class);
  r.get("test_per_class", v.test_per_class);
  r.get("params", v.params);
  r.finish();
}

void to_json(json& j, const DataConfig& v) {
  j = {{"train", v.train},
       {"validation", v.validation},
       {"test", v.test},
       {"train_count", v.train_count},
       {"validation_count", v.validation_count},
       {"test_count", v.test_count}};
}

void from_json(const json& j, DataConfig& v) {
  Reader r(j);
  r.get("train", v.train);
  r.get("validation", v.validation);
  r.get("test", v.test);
  r.get("train_count", v.train_count);
  r.get("validation_count", v.validation_count);
  r.get("test_count", v.test_count);
  r.finish();
}

void to_json(json& j, const ExperimentConfig& v) {
  j = {{"model", v.model}, {"train", v.train},           {"generate", v.generate},
       {"data", v.data},   {"out", v.out},               {"seed", v.seed},
       {"precision", to_string(v.precision)}};
}

void from_json(const json& j, ExperimentConfig& v) {
  Reader r(j);
  r.get("model", v.model);
  r.get("train", v.train);
  r.get("generate", v.generate);
  r.get("data", v.data);
  r.get("out", v.out);
  r.get("seed", v.seed);
  r.get_with("precision", v.precision, parse_precision);
  r.finish();
}

ModelConfig default_synthetic_model() {
  ModelConfig m;
  m.arch = Architecture::Ricnn;
  m.input_extent = 51;
  m.input_channels = 1;
  m.conv = {ConicConvSpec{8, 5, 1, 2}, ConicConvSpec{16, 5, 1, 2}, ConicConvSpec{16, 3, 1, 2}};
  m.transition = TransitionSpec{64, 1};
  m.hidden = {100};
  m.classes = 50;
  return m;
}

ModelConfig default_mnist_model() {
  ModelConfig m;
  m.arch = Architecture::Ricnn;
  m.input_extent = 29;
  m.input_channels = 1;
  m.conv = {ConicConvSpec{8, 5, 1, 1}, ConicConvSpec{16, 5, 1, 2}, ConicConvSpec{16, 3, 1, 2}};
  m.transition = TransitionSpec{20, 1};
  m.hidden = {10};
  m.classes = 10;
  return m;
}

nlohmann::json read_json(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

ExperimentConfig load_experiment_config(const std::filesystem::path& path) {
  const json j = read_json(path);
  try {
    return j.get<ExperimentConfig>();
  } catch (const ValidationError& e) {
    throw ValidationError(path.string() + ": " + e.what());
  } catch (const json::exception& e) {
    throw ValidationError(path.string() + ": " + e.what());
  }
}

void write_json(const std::filesystem::path& path, const nlohmann::json& j) {
  std::ofstream out(path);
  if (!out) throw IoError("cannot write " + path.string());
  out << j.dump(2) << '\n';
  if (!out) throw IoError("error writing " + path.string());
}

}  // namespace ricnn
