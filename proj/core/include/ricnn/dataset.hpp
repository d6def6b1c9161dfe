#pragma once

#include <cstdint>
#include <filesystem>
#include <vector>

#include <nlohmann/json.hpp>

#include "ricnn/tensor.hpp"

namespace ricnn {

/// N images of shape H x W x C with one class index each.
struct LabeledDataset {
  Tensor<float> images;  // N x H x W x C
  std::vector<std::uint32_t> labels;
  std::size_t classes = 0;
  nlohmann::json metadata = nlohmann::json::object();

  std::size_t size() const { return labels.size(); }
  std::size_t height() const { return images.extent(1); }
  std::size_t width() const { return images.extent(2); }
  std::size_t channels() const { return images.extent(3); }

  /// Copy of image i as H x W x C.
  Tensor<float> image(std::size_t i) const;

  /// Throws ValidationError unless N > 0, shapes agree and labels < classes.
  void validate() const;
};

LabeledDataset subset(const LabeledDataset& data, const std::vector<std::size_t>& indices);

/// Every image rotated by the same number of quarter turns.
LabeledDataset rotate_all(const LabeledDataset& data, int quarter_turns);

/// Even extents zero-padded on the right/bottom, as models do on input.
/// Rotating the padded images turns them about the pixel the model treats
/// as the origin.
LabeledDataset pad_all_to_odd(const LabeledDataset& data);

/// Whitespace-separated text, one example per row: 784 pixel values in
/// [0, 1] (row-major 28 x 28) followed by the label. Throws IoError naming
/// the line on malformed rows.
LabeledDataset load_amat(const std::filesystem::path& path);

struct DatasetSplit {
  LabeledDataset train;
  LabeledDataset validation;
  LabeledDataset test;
  std::vector<std::size_t> train_indices;
  std::vector<std::size_t> validation_indices;
  std::vector<std::size_t> test_indices;
};

/// Seeded shuffle, then consecutive disjoint blocks of the requested sizes.
/// Empty blocks are returned as datasets with no examples. Throws if the
/// sizes add up to more than N.
DatasetSplit split(const LabeledDataset& data, std::size_t n_train, std::size_t n_validation, std::size_t n_test,
                   std::uint64_t seed);

/// Directory layout: images.rtns (N x H x W x C, f32), labels.rlbl and
/// manifest.json (count, classes, shape plus `metadata`).
void save_dataset(const std::filesystem::path& dir, const LabeledDataset& data);
LabeledDataset load_dataset(const std::filesystem::path& dir);

}  // namespace ricnn
