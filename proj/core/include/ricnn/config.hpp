#pragma once

#include <cstdint>
#include <filesystem>
#include <string>

#include <nlohmann/json.hpp>

#include "ricnn/network.hpp"
#include "ricnn/synthgen.hpp"
#include "ricnn/train.hpp"

namespace ricnn {

// JSON mapping for every config type. Reading starts from the defaults, so
// missing keys keep them; unknown keys throw ValidationError.
void to_json(nlohmann::json& j, const ConicConvSpec& v);
void from_json(const nlohmann::json& j, ConicConvSpec& v);
void to_json(nlohmann::json& j, const TransitionSpec& v);
void from_json(const nlohmann::json& j, TransitionSpec& v);
void to_json(nlohmann::json& j, const ModelConfig& v);
void from_json(const nlohmann::json& j, ModelConfig& v);
void to_json(nlohmann::json& j, const AugmentConfig& v);
void from_json(const nlohmann::json& j, AugmentConfig& v);
void to_json(nlohmann::json& j, const TrainConfig& v);
void from_json(const nlohmann::json& j, TrainConfig& v);
void to_json(nlohmann::json& j, const GenParams& v);
void from_json(const nlohmann::json& j, GenParams& v);
void to_json(nlohmann::json& j, const GaussianComponent& v);
void from_json(const nlohmann::json& j, GaussianComponent& v);
void to_json(nlohmann::json& j, const ClassSpec& v);
void from_json(const nlohmann::json& j, ClassSpec& v);

/// 51 x 51 input (50 padded), three conic layers, 64 transition filters,
/// one hidden layer of 100, 50 classes.
ModelConfig default_synthetic_model();

/// 29 x 29 input (28 padded), three conic layers, 20 transition filters,
/// one hidden layer of 10, 10 classes.
ModelConfig default_mnist_model();

struct GenerateConfig {
  std::size_t classes = 50;
  std::size_t gaussians = 10;
  std::size_t train_per_class = 25;
  std::size_t test_per_class = 200;
  GenParams params;

  bool operator==(const GenerateConfig&) const = default;
};

/// Each path is either a dataset directory or an .amat file. A validation
/// set is split off the training set when `validation` is empty and
/// `validation_count` > 0. Counts of 0 mean "all".
struct DataConfig {
  std::string train;
  std::string validation;
  std::string test;
  std::size_t train_count = 0;
  std::size_t validation_count = 0;
  std::size_t test_count = 0;

  bool operator==(const DataConfig&) const = default;
};

enum class Precision : std::uint8_t { F32, F64 };
std::string to_string(Precision p);
Precision parse_precision(const std::string& name);

struct ExperimentConfig {
  ModelConfig model = default_synthetic_model();  // reference architecture
  TrainConfig train;
  GenerateConfig generate;
  DataConfig data;
  std::string out = "out";
  std::uint64_t seed = 0;
  Precision precision = Precision::F32;

  bool operator==(const ExperimentConfig&) const = default;
};

void to_json(nlohmann::json& j, const GenerateConfig& v);
void from_json(const nlohmann::json& j, GenerateConfig& v);
void to_json(nlohmann::json& j, const DataConfig& v);
void from_json(const nlohmann::json& j, DataConfig& v);
void to_json(nlohmann::json& j, const ExperimentConfig& v);
void from_json(const nlohmann::json& j, ExperimentConfig& v);

/// Parses a JSON config file. Throws IoError if unreadable, ValidationError
/// on bad content.
ExperimentConfig load_experiment_config(const std::filesystem::path& path);

/// Writes `j` pretty-printed with a trailing newline.
void write_json(const std::filesystem::path& path, const nlohmann::json& j);
nlohmann::json read_json(const std::filesystem::path& path);

}  // namespace ricnn
