#include "corrmap/data/dataset.hpp"

#include <filesystem>
#include <fstream>

#include <fmt/format.h>
#include <nlohmann/json.hpp>

#include "corrmap/core/error.hpp"

namespace corrmap::data {

namespace fs = std::filesystem;
using nlohmann::json;

void save_manifest(const std::string& dataset_dir, const Manifest& m) {
  json j;
  j["mesh_obj"] = m.mesh_obj;
  j["mesh_rig"] = m.mesh_rig;
  j["mesh_hash"] = fmt::format("{:016x}", m.mesh_hash);
  j["image_size"] = m.image_size;
  j["train"] = m.train_dirs;
  j["test"] = m.test_dirs;
  fs::create_directories(dataset_dir);
  std::ofstream out(fs::path(dataset_dir) / "manifest.json");
  if (!out)
    throw InputError(fmt::format("cannot write manifest in {}", dataset_dir));
  out << j.dump(1) << "\n";
}

Manifest load_manifest(const std::string& dataset_dir) {
  std::ifstream in(fs::path(dataset_dir) / "manifest.json");
  if (!in)
    throw InputError(fmt::format("no manifest.json in {}", dataset_dir));
  json j;
  try {
    in >> j;
  } catch (const json::exception& e) {
    throw InputError(fmt::format("bad manifest in {}: {}", dataset_dir, e.what()));
  }
  Manifest m;
  m.mesh_obj = j.at("mesh_obj");
  m.mesh_rig = j.at("mesh_rig");
  m.mesh_hash = std::stoull(j.at("mesh_hash").get<std::string>(), nullptr, 16);
  m.image_size = j.at("image_size");
  m.train_dirs = j.at("train").get<std::vector<std::string>>();
  m.test_dirs = j.at("test").get<std::vector<std::string>>();
  return m;
}

std::vector<Sample> load_split(const std::string& dataset_dir,
                               const Manifest& m, const std::string& split) {
  const std::vector<std::string>* dirs = nullptr;
  if (split == "train")
    dirs = &m.train_dirs;
  else if (split == "test")
    dirs = &m.test_dirs;
  else
    throw InputError(fmt::format("unknown split '{}'", split));
  std::vector<Sample> out;
  out.reserve(dirs->size());
  for (const auto& d : *dirs)
    out.push_back(load_sample((fs::path(dataset_dir) / d).string()));
  return out;
}

}  // namespace corrmap::data
