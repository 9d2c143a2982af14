#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "corrmap/data/sample.hpp"

namespace corrmap::data {

// On-disk dataset: manifest.json at the root listing sample directories
// (relative) plus the template hash, with one directory per sample.
struct Manifest {
  std::string mesh_obj, mesh_rig;  // template asset paths
  uint64_t mesh_hash = 0;
  int image_size = 0;
  std::vector<std::string> train_dirs, test_dirs;
};

void save_manifest(const std::string& dataset_dir, const Manifest& m);
Manifest load_manifest(const std::string& dataset_dir);

// Loads every sample of a split ("train" or "test") into memory.
std::vector<Sample> load_split(const std::string& dataset_dir,
                               const Manifest& m, const std::string& split);

}  // namespace corrmap::data
