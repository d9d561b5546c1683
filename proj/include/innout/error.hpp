#pragma once

#include <stdexcept>
#include <string>

namespace innout {

// Validation failures map to CLI exit code 1, I/O failures to exit code 2.
struct ValidationError : std::runtime_error {
  explicit ValidationError(const std::string& msg) : std::runtime_error(msg) {}
};

struct CodecError : ValidationError {
  explicit CodecError(const std::string& msg) : ValidationError(msg) {}
};

struct IoError : std::runtime_error {
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace innout
