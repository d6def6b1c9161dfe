#pragma once

#include <filesystem>

#include <nlohmann/json.hpp>

#include "ricnn/config.hpp"
#include "ricnn/network.hpp"

namespace ricnn {

/// Directory with one tensor file per parameter (`<name>.rtns`) and
/// manifest.json holding the model config, precision and parameter list.
template <typename T>
void save_checkpoint(const std::filesystem::path& dir, const Model<T>& model,
                     const nlohmann::json& extra = nlohmann::json::object());

struct CheckpointInfo {
  ModelConfig model;
  Precision precision;
  nlohmann::json extra;
};

/// Reads and checks manifest.json only.
CheckpointInfo read_checkpoint_info(const std::filesystem::path& dir);

/// Rebuilds the model and loads every parameter. Throws IoError naming the
/// offending file on missing, corrupt or mis-shaped tensors.
template <typename T>
Model<T> load_checkpoint(const std::filesystem::path& dir);

}  // namespace ricnn
