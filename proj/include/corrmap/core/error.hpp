#pragma once

#include <stdexcept>
#include <string>

namespace corrmap {

// Bad user-supplied data (missing files, malformed meshes, empty masks...).
// The CLI maps this to exit code 3.
struct InputError : std::runtime_error {
  explicit InputError(const std::string& msg) : std::runtime_error(msg) {}
};

// Numeric failure (NaN loss, divergence). CLI exit code 4.
struct NumericError : std::runtime_error {
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace corrmap
