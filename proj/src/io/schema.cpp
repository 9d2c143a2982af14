#include "corrmap/io/schema.hpp"

#include <fstream>

#include <fmt/format.h>

#include "corrmap/core/error.hpp"

namespace corrmap::io {

using nlohmann::json;

namespace {

bool type_matches(const json& v, const std::string& t) {
  if (t == "object") return v.is_object();
  if (t == "array") return v.is_array();
  if (t == "string") return v.is_string();
  if (t == "number") return v.is_number();
  if (t == "integer") return v.is_number_integer() || v.is_number_unsigned();
  if (t == "boolean") return v.is_boolean();
  if (t == "null") return v.is_null();
  return false;
}

void validate_at(const json& v, const json& s, const std::string& path,
                 std::vector<std::string>* errors) {
  if (s.contains("type")) {
    const std::string t = s["type"];
    if (!type_matches(v, t)) {
      errors->push_back(fmt::format("{}: expected {}", path.empty() ? "$" : path, t));
      return;
    }
  }
  if (s.contains("enum")) {
    bool ok = false;
    for (const auto& e : s["enum"]) ok |= e == v;
    if (!ok) errors->push_back(fmt::format("{}: value not in enum", path));
  }
  if (v.is_number()) {
    if (s.contains("minimum") && v.get<double>() < s["minimum"].get<double>())
      errors->push_back(fmt::format("{}: below minimum {}", path,
                                    s["minimum"].get<double>()));
    if (s.contains("maximum") && v.get<double>() > s["maximum"].get<double>())
      errors->push_back(fmt::format("{}: above maximum {}", path,
                                    s["maximum"].get<double>()));
  }
  if (v.is_object()) {
    if (s.contains("required"))
      for (const auto& r : s["required"])
        if (!v.contains(r.get<std::string>()))
          errors->push_back(
              fmt::format("{}: missing required key '{}'", path.empty() ? "$" : path,
                          r.get<std::string>()));
    const json props = s.value("properties", json::object());
    for (auto it = v.begin(); it != v.end(); ++it) {
      const std::string child = path + "/" + it.key();
      if (props.contains(it.key())) {
        validate_at(it.value(), props[it.key()], child, errors);
      } else if (s.contains("additionalProperties")) {
        const json& ap = s["additionalProperties"];
        if (ap.is_boolean() && !ap.get<bool>())
          errors->push_back(fmt::format("{}: unexpected key '{}'", path, it.key()));
        else if (ap.is_object())
          validate_at(it.value(), ap, child, errors);
      }
    }
  }
  if (v.is_array() && s.contains("items"))
    for (size_t i = 0; i < v.size(); ++i)
      validate_at(v[i], s["items"], fmt::format("{}/{}", path, i), errors);
}

}  // namespace

std::vector<std::string> validate_schema(const json& value, const json& schema) {
  std::vector<std::string> errors;
  validate_at(value, schema, "", &errors);
  return errors;
}

json load_json_file(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw InputError(fmt::format("cannot open JSON file: {}", path));
  try {
    json j;
    in >> j;
    return j;
  } catch (const json::exception& e) {
    throw InputError(fmt::format("bad JSON in {}: {}", path, e.what()));
  }
}

}  // namespace corrmap::io
