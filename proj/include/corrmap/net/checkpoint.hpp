#pragma once

#include <string>

#include <nlohmann/json.hpp>

#include "corrmap/net/model.hpp"

namespace corrmap::net {

// Single-file checkpoint: magic, version, a JSON blob echoing the model
// config (plus caller extras like step counts), then the named parameter
// arrays. Writes are atomic (temp file + rename).
void save_checkpoint(const std::string& path, const Model& model,
                     const nlohmann::json& extra = nlohmann::json::object());

// Reads the config echo without loading tensors.
nlohmann::json checkpoint_info(const std::string& path);

// Builds a fresh model from the stored config and loads all parameters.
Model load_checkpoint(const std::string& path);

// Loads into an existing model; throws InputError naming the first missing /
// extra / shape-mismatched parameter (e.g. a heads=1 file into a heads=3
// model names the absent head parameters).
void load_checkpoint_into(const std::string& path, Model& model);

}  // namespace corrmap::net
