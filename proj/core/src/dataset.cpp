#include "ricnn/dataset.hpp"

#include <charconv>
#include <cmath>
#include <fstream>
#include <sstream>

#include "ricnn/rng.hpp"
#include "ricnn/tensor_io.hpp"

namespace ricnn {

namespace fs = std::filesystem;

namespace {
constexpr std::size_t kAmatSide = 28;
constexpr std::size_t kAmatPixels = kAmatSide * kAmatSide;
}  // namespace

Tensor<float> LabeledDataset::image(std::size_t i) const {
  if (i >= size()) throw ValidationError("image index " + std::to_string(i) + " out of range");
  const std::size_t h = height(), w = width(), c = channels();
  const std::size_t n = h * w * c;
  std::vector<float> data(images.data() + i * n, images.data() + (i + 1) * n);
  return Tensor<float>({h, w, c}, std::move(data));
}

void LabeledDataset::validate() const {
  if (labels.empty()) throw ValidationError("dataset is empty");
  if (images.rank() != 4 || images.extent(0) != labels.size()) {
    throw ValidationError("dataset images " + to_string(images.shape()) + " do not match " +
                          std::to_string(labels.size()) + " labels");
  }
  for (auto l : labels) {
    if (l >= classes) {
      throw ValidationError("label " + std::to_string(l) + " >= class count " + std::to_string(classes));
    }
  }
}

LabeledDataset subset(const LabeledDataset& data, const std::vector<std::size_t>& indices) {
  LabeledDataset out;
  out.classes = data.classes;
  out.metadata = data.metadata;
  if (indices.empty()) return out;
  const std::size_t n = data.height() * data.width() * data.channels();
  std::vector<float> pixels;
  pixels.reserve(indices.size() * n);
  for (auto i : indices) {
    if (i >= data.size()) throw ValidationError("subset index out of range");
    pixels.insert(pixels.end(), data.images.data() + i * n, data.images.data() + (i + 1) * n);
    out.labels.push_back(data.labels[i]);
  }
  out.images = Tensor<float>({indices.size(), data.height(), data.width(), data.channels()}, std::move(pixels));
  return out;
}

LabeledDataset rotate_all(const LabeledDataset& data, int quarter_turns) {
  LabeledDataset out = data;
  if (data.size() == 0) return out;
  const std::size_t n = data.height() * data.width() * data.channels();
  for (std::size_t i = 0; i < data.size(); ++i) {
    auto r = rot90(data.image(i), quarter_turns);
    if (r.shape() != Shape{data.height(), data.width(), data.channels()}) {
      throw ValidationError("rotate_all needs square images");
    }
    std::copy(r.data(), r.data() + n, out.images.data() + i * n);
  }
  return out;
}

LabeledDataset pad_all_to_odd(const LabeledDataset& data) {
  if (data.size() == 0 || (data.height() % 2 == 1 && data.width() % 2 == 1)) return data;
  const std::size_t h = data.height() | 1, w = data.width() | 1, c = data.channels();
  std::vector<float> pixels;
  pixels.reserve(data.size() * h * w * c);
  for (std::size_t i = 0; i < data.size(); ++i) {
    const auto padded = pad_to_odd(data.image(i));
    pixels.insert(pixels.end(), padded.data(), padded.data() + padded.size());
  }
  LabeledDataset out = data;
  out.images = Tensor<float>({data.size(), h, w, c}, std::move(pixels));
  return out;
}

LabeledDataset load_amat(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw IoError("cannot open " + path.string());
  std::vector<float> pixels;
  std::vector<std::uint32_t> labels;
  std::string line;
  std::size_t line_no = 0;
  std::vector<double> fields;
  while (std::getline(in, line)) {
    ++line_no;
    fields.clear();
    const char* p = line.data();
    const char* end = p + line.size();
    while (p < end) {
      while (p < end && std::isspace(static_cast<unsigned char>(*p))) ++p;
      if (p >= end) break;
      double v = 0.0;
      auto [next, ec] = std::from_chars(p, end, v);
      if (ec != std::errc{}) {
        throw IoError(path.string() + ":" + std::to_string(line_no) + ": unparsable field");
      }
      fields.push_back(v);
      p = next;
    }
    if (fields.empty()) continue;
    if (fields.size() != kAmatPixels + 1) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": expected " + std::to_string(kAmatPixels + 1) +
                    " fields, got " + std::to_string(fields.size()));
    }
    for (std::size_t i = 0; i < kAmatPixels; ++i) {
      if (!(fields[i] >= 0.0 && fields[i] <= 1.0)) {
        throw IoError(path.string() + ":" + std::to_string(line_no) + ": pixel value outside [0, 1]");
      }
      pixels.push_back(static_cast<float>(fields[i]));
    }
    const double label = fields.back();
    if (label < 0.0 || label > 9.0 || std::floor(label) != label) {
      throw IoError(path.string() + ":" + std::to_string(line_no) + ": label must be an integer in 0..9");
    }
    labels.push_back(static_cast<std::uint32_t>(label));
  }
  if (labels.empty()) throw IoError(path.string() + ": no examples");
  LabeledDataset out;
  out.images = Tensor<float>({labels.size(), kAmatSide, kAmatSide, 1}, std::move(pixels));
  out.labels = std::move(labels);
  out.classes = 10;
  out.metadata = {{"source", path.filename().string()}};
  return out;
}

DatasetSplit split(const LabeledDataset& data, std::size_t n_train, std::size_t n_validation, std::size_t n_test,
                   std::uint64_t seed) {
  if (n_train + n_validation + n_test > data.size()) {
    throw ValidationError("split sizes " + std::to_string(n_train) + "+" + std::to_string(n_validation) + "+" +
                          std::to_string(n_test) + " exceed dataset size " + std::to_string(data.size()));
  }
  Rng rng(seed);
  const auto perm = rng.permutation(data.size());
  DatasetSplit out;
  out.train_indices.assign(perm.begin(), perm.begin() + static_cast<long>(n_train));
  out.validation_indices.assign(perm.begin() + static_cast<long>(n_train),
                                perm.begin() + static_cast<long>(n_train + n_validation));
  out.test_indices.assign(perm.begin() + static_cast<long>(n_train + n_validation),
                          perm.begin() + static_cast<long>(n_train + n_validation + n_test));
  out.train = subset(data, out.train_indices);
  out.validation = subset(data, out.validation_indices);
  out.test = subset(data, out.test_indices);
  return out;
}

void save_dataset(const fs::path& dir, const LabeledDataset& data) {
  data.validate();
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  save_tensor(dir / "images.rtns", data.images);
  save_labels(dir / "labels.rlbl", data.labels);
  nlohmann::json manifest = {
      {"format", "ricnn-dataset"},
      {"version", 1},
      {"count", data.size()},
      {"classes", data.classes},
      {"shape", data.images.shape()},
      {"metadata", data.metadata},
  };
  std::ofstream out(dir / "manifest.json");
  if (!out) throw IoError("cannot write " + (dir / "manifest.json").string());
  out << manifest.dump(2) << '\n';
}

LabeledDataset load_dataset(const fs::path& dir) {
  const auto manifest_path = dir / "manifest.json";
  std::ifstream in(manifest_path);
  if (!in) throw IoError("cannot open " + manifest_path.string());
  nlohmann::json manifest;
  try {
    manifest = nlohmann::json::parse(in);
  } catch (const nlohmann::json::exception& e) {
    throw IoError(manifest_path.string() + ": " + e.what());
  }
  LabeledDataset out;
  out.images = load_tensor<float>(dir / "images.rtns");
  out.labels = load_labels(dir / "labels.rlbl");
  try {
    out.classes = manifest.at("classes").get<std::size_t>();
    if (manifest.contains("metadata")) out.metadata = manifest.at("metadata");
  } catch (const nlohmann::json::exception& e) {
    throw IoError(manifest_path.string() + ": " + e.what());
  }
  try {
    out.validate();
  } catch (const ValidationError& e) {
    throw IoError(dir.string() + ": " + e.what());
  }
  return out;
}

}  // namespace ricnn
