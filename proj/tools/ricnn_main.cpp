// ricnn command-line tool: generate, train, evaluate, verify.
//
// Settings come from built-in defaults, then the --config JSON file, then
// individual flags; later sources win.
//
// Exit codes: 0 success, 1 validation error, 2 property failure, 3 I/O error.

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include "ricnn/checkpoint.hpp"
#include "ricnn/config.hpp"
#include "ricnn/dataset.hpp"
#include "ricnn/errors.hpp"
#include "ricnn/synthgen.hpp"
#include "ricnn/train.hpp"
#include "ricnn/verify.hpp"

namespace fs = std::filesystem;
using namespace ricnn;

namespace {

enum ExitCode { kOk = 0, kValidation = 1, kPropertyFailure = 2, kIo = 3 };

struct CommonFlags {
  std::string config;
  std::optional<std::uint64_t> seed;
  std::optional<std::string> out;
  std::optional<std::string> arch;
  std::optional<std::string> precision;
  std::optional<std::string> train;
  std::optional<std::string> validation;
  std::optional<std::string> test;
};

void add_common(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--config", f.config, "JSON config file");
  cmd->add_option("--seed", f.seed, "Master seed");
  cmd->add_option("--out", f.out, "Output directory");
}

void add_data(CLI::App* cmd, CommonFlags& f) {
  cmd->add_option("--train", f.train, "Training set (dataset directory or .amat file)");
  cmd->add_option("--validation", f.validation, "Validation set (dataset directory or .amat file)");
  cmd->add_option("--test", f.test, "Test set (dataset directory or .amat file)");
}

ExperimentConfig resolve(const CommonFlags& f) {
  ExperimentConfig c;
  if (!f.config.empty()) c = load_experiment_config(f.config);
  if (f.seed) c.seed = *f.seed;
  if (f.out) c.out = *f.out;
  if (f.precision) c.precision = parse_precision(*f.precision);
  if (f.train) c.data.train = *f.train;
  if (f.validation) c.data.validation = *f.validation;
  if (f.test) c.data.test = *f.test;
  return c;
}

void make_dir(const fs::path& dir) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
}

LabeledDataset load_any(const std::string& path) {
  if (!fs::exists(path)) throw IoError("dataset not found: " + path);
  if (fs::path(path).extension() == ".amat") return load_amat(path);
  return load_dataset(path);
}

// Seeded subsample of n examples; n = 0 or n >= size keeps everything.
LabeledDataset take(const LabeledDataset& data, std::size_t n, std::uint64_t seed) {
  if (n == 0 || n >= data.size()) return data;
  return split(data, n, 0, 0, seed).train;
}

struct Data {
  LabeledDataset train;
  std::optional<LabeledDataset> validation;
  std::optional<LabeledDataset> test;
};

Data load_data(const ExperimentConfig& c) {
  if (c.data.train.empty()) throw ValidationError("no training set given (--train or data.train)");
  Data d;
  d.train = load_any(c.data.train);
  if (!c.data.validation.empty()) {
    d.validation = take(load_any(c.data.validation), c.data.validation_count, mix64(c.seed ^ 0x7661));
    d.train = take(d.train, c.data.train_count, mix64(c.seed ^ 0x7472));
  } else if (c.data.validation_count > 0) {
    const std::size_t rest = d.train.size() - std::min(d.train.size(), c.data.validation_count);
    const std::size_t n_train = c.data.train_count ? std::min(c.data.train_count, rest) : rest;
    auto parts = split(d.train, n_train, c.data.validation_count, 0, mix64(c.seed ^ 0x7370));
    d.train = std::move(parts.train);
    d.validation = std::move(parts.validation);
  } else {
    d.train = take(d.train, c.data.train_count, mix64(c.seed ^ 0x7472));
  }
  if (!c.data.test.empty()) d.test = take(load_any(c.data.test), c.data.test_count, mix64(c.seed ^ 0x7465));
  return d;
}

void check_fit(const ModelConfig& m, const LabeledDataset& data, const std::string& name) {
  const std::size_t h = data.height() | 1, w = data.width() | 1;
  if (h != m.input_extent || w != m.input_extent) {
    throw ValidationError("input layer: " + name + " images are " + std::to_string(data.height()) + "x" +
                          std::to_string(data.width()) + " (padded to " + std::to_string(h) + "x" +
                          std::to_string(w) + ") but the model expects " + std::to_string(m.input_extent) + "x" +
                          std::to_string(m.input_extent));
  }
  if (data.channels() != m.input_channels) {
    throw ValidationError("input layer: " + name + " images have " + std::to_string(data.channels()) +
                          " channels, the model expects " + std::to_string(m.input_channels));
  }
  if (data.classes > m.classes) {
    throw ValidationError("output layer: " + name + " has " + std::to_string(data.classes) +
                          " classes but the model outputs " + std::to_string(m.classes));
  }
}

std::string pct(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.2f", 100.0 * v);
  return buf;
}

std::string fixed(double v, int digits) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.*f", digits, v);
  return buf;
}

int cmd_generate(const CommonFlags& f, std::optional<std::size_t> classes, std::optional<std::size_t> train_n,
                 std::optional<std::size_t> test_n) {
  auto c = resolve(f);
  if (classes) c.generate.classes = *classes;
  if (train_n) c.generate.train_per_class = *train_n;
  if (test_n) c.generate.test_per_class = *test_n;
  const auto& g = c.generate;
  if (g.classes < 1) throw ValidationError("generate.classes must be >= 1");
  if (g.gaussians < 1) throw ValidationError("generate.gaussians must be >= 1");
  if (g.train_per_class < 1) throw ValidationError("generate.train_per_class must be >= 1");
  if (g.test_per_class < 1) throw ValidationError("generate.test_per_class must be >= 1");
  validate(g.params);

  const fs::path out(c.out);
  make_dir(out);
  write_json(out / "config.json", c);
  Rng spec_rng(mix64(c.seed ^ 0x73706563));
  const auto specs = sample_class_specs(g.classes, g.gaussians, spec_rng);
  write_json(out / "specs.json", {{"spec_hash", spec_hash(specs)}, {"specs", specs}});
  const auto train = generate_dataset(specs, g.params, g.train_per_class, mix64(c.seed ^ 0x747261696e));
  save_dataset(out / "train", train);
  const auto test = generate_dataset(specs, g.params, g.test_per_class, mix64(c.seed ^ 0x74657374));
  save_dataset(out / "test", test);
  std::cout << "generated " << train.size() << " training and " << test.size() << " test images, " << g.classes
            << " classes, spec hash " << spec_hash(specs) << " -> " << out.string() << '\n';
  return kOk;
}

template <typename T>
int run_train(const ExperimentConfig& c, const ModelConfig& model_config, const Data& data) {
  const fs::path out(c.out);
  Model<T> model(model_config);
  model.initialize(mix64(c.seed ^ 0x696e6974));
  const LabeledDataset* eval = data.validation ? &*data.validation : data.test ? &*data.test : &data.train;
  const std::string eval_name = data.validation ? "validation" : data.test ? "test" : "train";
  std::cout << "model " << to_string(model_config.arch) << ", " << model.parameter_count() << " parameters, "
            << to_string(c.precision) << "; " << data.train.size() << " training examples, eval on " << eval_name
            << " (" << eval->size() << ")\n";

  auto result = train(model, data.train, eval, c.train, [](const MetricRow& row) {
    std::cout << "step " << row.step << " loss " << fixed(row.loss, 6) << " eval_acc " << fixed(row.eval_acc, 4)
              << std::endl;
  });
  write_metrics_csv(out / "metrics.csv", result.log);
  save_checkpoint(out / "checkpoint", model, {{"step", c.train.max_steps}});

  auto params = model.parameters();
  for (std::size_t i = 0; i < params.size(); ++i) *params[i].value = result.best_parameters[i];
  save_checkpoint(out / "best", model, {{"step", result.best_step}, {"eval_accuracy", result.best_eval_accuracy}});

  std::cout << "best " << eval_name << " accuracy " << fixed(result.best_eval_accuracy, 4) << " at step "
            << result.best_step << '\n';
  if (data.test) {
    const auto r = evaluate(model, *data.test);
    std::cout << "test accuracy of best model " << fixed(r.accuracy, 4) << " (error " << pct(1.0 - r.accuracy)
              << "%), mAP " << fixed(r.mean_ap, 4) << '\n';
  }
  return kOk;
}

int cmd_train(const CommonFlags& f, std::optional<std::size_t> steps, std::optional<std::size_t> eval_every) {
  auto c = resolve(f);
  if (steps) c.train.max_steps = *steps;
  if (eval_every) c.train.eval_every = *eval_every;
  c.train.seed = c.seed;
  validate(c.train);
  validate(c.model);
  const Architecture arch = f.arch ? parse_architecture(*f.arch) : c.model.arch;
  const ModelConfig effective = match_parameters(c.model, arch);

  const auto data = load_data(c);
  check_fit(effective, data.train, "training set");
  if (data.validation) check_fit(effective, *data.validation, "validation set");
  if (data.test) check_fit(effective, *data.test, "test set");

  make_dir(c.out);
  nlohmann::json echo = c;
  echo["model"] = effective;
  echo["reference_parameters"] = count_parameters(c.model);
  write_json(fs::path(c.out) / "config.json", echo);
  return c.precision == Precision::F32 ? run_train<float>(c, effective, data) : run_train<double>(c, effective, data);
}

template <typename T>
int run_evaluate(const fs::path& checkpoint, const LabeledDataset& data, const fs::path& out) {
  const auto model = load_checkpoint<T>(checkpoint);
  check_fit(model.config(), data, "evaluation set");
  const auto r = evaluate(model, data);
  make_dir(out);
  write_per_class_csv(out / "per_class.csv", r);
  write_json(out / "evaluation.json", {{"checkpoint", checkpoint.string()},
                                       {"count", r.count},
                                       {"accuracy", r.accuracy},
                                       {"test_error_percent", 100.0 * (1.0 - r.accuracy)},
                                       {"mean_average_precision", r.mean_ap}});
  std::cout << "examples " << r.count << "\naccuracy " << fixed(r.accuracy, 4) << "\ntest error " << pct(1.0 - r.accuracy)
            << "%\nmAP " << fixed(r.mean_ap, 4) << '\n';
  return kOk;
}

int cmd_evaluate(const CommonFlags& f, const std::string& checkpoint, int rotate) {
  auto c = resolve(f);
  if (checkpoint.empty()) throw ValidationError("--checkpoint is required");
  const std::string path = !c.data.test.empty() ? c.data.test : c.data.train;
  if (path.empty()) throw ValidationError("no evaluation set given (--test)");
  auto data = take(load_any(path), c.data.test_count, mix64(c.seed ^ 0x7465));
  if (rotate % 4 != 0) data = rotate_all(pad_all_to_odd(data), rotate);
  const auto info = read_checkpoint_info(checkpoint);
  const Precision p = f.precision ? c.precision : info.precision;
  return p == Precision::F32 ? run_evaluate<float>(checkpoint, data, c.out)
                             : run_evaluate<double>(checkpoint, data, c.out);
}

int cmd_verify(const CommonFlags& f, std::size_t instances, bool perturb_origin) {
  const auto c = resolve(f);
  VerifyOptions o;
  o.seed = c.seed;
  o.instances = instances;
  o.perturb_origin = perturb_origin;
  if (o.instances < 1) throw ValidationError("--instances must be >= 1");
  const auto results = run_all_suites(o);
  const auto report = format_report(results, o);
  std::cout << report;
  if (f.out) {
    make_dir(*f.out);
    std::ofstream os(fs::path(*f.out) / "verify_report.txt");
    if (!os) throw IoError("cannot write " + (fs::path(*f.out) / "verify_report.txt").string());
    os << report;
  }
  for (const auto& r : results) {
    std::cerr << r.name << ": " << fixed(r.seconds, 2) << " s\n";
  }
  for (const auto& r : results) {
    if (!r.passed) return kPropertyFailure;
  }
  return kOk;
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Rotation-invariant CNN toolkit: generate, train, evaluate, verify"};
  app.require_subcommand(1);

  CommonFlags gen_f, train_f, eval_f, verify_f;

  auto* gen = app.add_subcommand("generate", "Write synthetic GMM train and test sets");
  add_common(gen, gen_f);
  std::optional<std::size_t> classes, train_n, test_n;
  gen->add_option("--classes", classes, "Number of classes");
  gen->add_option("--train-per-class", train_n, "Training images per class");
  gen->add_option("--test-per-class", test_n, "Test images per class");

  auto* tr = app.add_subcommand("train", "Train a model and log metrics.csv");
  add_common(tr, train_f);
  add_data(tr, train_f);
  tr->add_option("--arch", train_f.arch, "Architecture")->check(CLI::IsMember({"cnn", "ricnn", "recnn"}));
  tr->add_option("--precision", train_f.precision, "Floating point precision")->check(CLI::IsMember({"f32", "f64"}));
  std::optional<std::size_t> steps, eval_every;
  tr->add_option("--steps", steps, "Override train.max_steps");
  tr->add_option("--eval-every", eval_every, "Override train.eval_every");

  auto* ev = app.add_subcommand("evaluate", "Accuracy, test error and mAP of a checkpoint");
  add_common(ev, eval_f);
  add_data(ev, eval_f);
  ev->add_option("--precision", eval_f.precision, "Floating point precision")->check(CLI::IsMember({"f32", "f64"}));
  std::string checkpoint;
  int rotate = 0;
  ev->add_option("--checkpoint", checkpoint, "Checkpoint directory")->required();
  ev->add_option("--rotate", rotate, "Rotate every test image by this many quarter turns (after odd padding)");

  auto* ver = app.add_subcommand("verify", "Run the property suites");
  add_common(ver, verify_f);
  std::size_t instances = 50;
  bool perturb_origin = false;
  ver->add_option("--instances", instances, "Random instances per suite");
  ver->add_flag("--perturb-origin", perturb_origin, "Pool the origin over r < R only (negative control)");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? kOk : kValidation;
  }

  try {
    if (*gen) return cmd_generate(gen_f, classes, train_n, test_n);
    if (*tr) return cmd_train(train_f, steps, eval_every);
    if (*ev) return cmd_evaluate(eval_f, checkpoint, rotate);
    if (*ver) return cmd_verify(verify_f, instances, perturb_origin);
  } catch (const IoError& e) {
    std::cerr << "I/O error: " << e.what() << '\n';
    return kIo;
  } catch (const ValidationError& e) {
    std::cerr << "validation error: " << e.what() << '\n';
    return kValidation;
  } catch (const NumericError& e) {
    std::cerr << "numeric error: " << e.what() << '\n';
    return kValidation;
  }
  return kValidation;
}
