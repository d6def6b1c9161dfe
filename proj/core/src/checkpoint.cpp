#include "ricnn/checkpoint.hpp"

#include "ricnn/errors.hpp"
#include "ricnn/tensor_io.hpp"

namespace ricnn {

namespace fs = std::filesystem;

template <typename T>
void save_checkpoint(const fs::path& dir, const Model<T>& model, const nlohmann::json& extra) {
  std::error_code ec;
  fs::create_directories(dir, ec);
  if (ec) throw IoError("cannot create " + dir.string() + ": " + ec.message());
  nlohmann::json params = nlohmann::json::array();
  for (const auto& p : model.parameters()) {
    const std::string file = p.name + ".rtns";
    save_tensor(dir / file, *p.value);
    params.push_back({{"name", p.name}, {"file", file}, {"shape", p.value->shape()}});
  }
  const Precision precision = sizeof(T) == 4 ? Precision::F32 : Precision::F64;
  write_json(dir / "manifest.json", {{"format", "ricnn-checkpoint"},
                                     {"version", 1},
                                     {"precision", to_string(precision)},
                                     {"model", model.config()},
                                     {"parameter_count", model.parameter_count()},
                                     {"parameters", params},
                                     {"extra", extra}});
}

CheckpointInfo read_checkpoint_info(const fs::path& dir) {
  const auto path = dir / "manifest.json";
  nlohmann::json j;
  try {
    j = read_json(path);
  } catch (const ValidationError& e) {
    throw IoError(e.what());
  }
  try {
    if (j.at("format") != "ricnn-checkpoint") throw IoError(path.string() + ": not a checkpoint manifest");
    if (j.at("version") != 1) throw IoError(path.string() + ": unsupported checkpoint version");
    CheckpointInfo info{j.at("model").get<ModelConfig>(), parse_precision(j.at("precision").get<std::string>()),
                        j.value("extra", nlohmann::json::object())};
    return info;
  } catch (const nlohmann::json::exception& e) {
    throw IoError(path.string() + ": " + e.what());
  } catch (const ValidationError& e) {
    throw IoError(path.string() + ": " + e.what());
  }
}

template <typename T>
Model<T> load_checkpoint(const fs::path& dir) {
  const auto info = read_checkpoint_info(dir);
  Model<T> model(info.model);
  const auto manifest = read_json(dir / "manifest.json");
  const auto& listed = manifest.at("parameters");
  auto params = model.parameters();
  if (listed.size() != params.size()) {
    throw IoError((dir / "manifest.json").string() + ": lists " + std::to_string(listed.size()) +
                  " parameters, model has " + std::to_string(params.size()));
  }
  for (std::size_t i = 0; i < params.size(); ++i) {
    const auto file = dir / listed[i].at("file").get<std::string>();
    if (listed[i].at("name").get<std::string>() != params[i].name) {
      throw IoError(file.string() + ": expected parameter " + params[i].name);
    }
    auto t = load_tensor<T>(file);
    if (t.shape() != params[i].value->shape()) {
      throw IoError(file.string() + ": shape " + to_string(t.shape()) + " does not match " + params[i].name + " " +
                    to_string(params[i].value->shape()));
    }
    *params[i].value = std::move(t);
  }
  return model;
}

template void save_checkpoint<float>(const fs::path&, const Model<float>&, const nlohmann::json&);
template void save_checkpoint<double>(const fs::path&, const Model<double>&, const nlohmann::json&);
template Model<float> load_checkpoint<float>(const fs::path&);
template Model<double> load_checkpoint<double>(const fs::path&);

}  // namespace ricnn
