#pragma once

#include <string>
#include <vector>

#include <nlohmann/json.hpp>

namespace corrmap::io {

// Validator for the JSON-schema subset the shipped schemas use: type,
// properties, required, items, additionalProperties, enum, minimum, maximum.
// Returns human-readable violations ("" path = document root); empty means
// valid.
std::vector<std::string> validate_schema(const nlohmann::json& value,
                                         const nlohmann::json& schema);

nlohmann::json load_json_file(const std::string& path);

}  // namespace corrmap::io
