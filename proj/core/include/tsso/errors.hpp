#pragma once

#include <stdexcept>
#include <string>

namespace tsso {

// Error taxonomy mirrors the CLI exit codes: 1 = bad configuration or input
// schema, 2 = file/IO trouble, 3 = numeric degeneracy.

class ConfigError : public std::runtime_error {
public:
  explicit ConfigError(const std::string& msg) : std::runtime_error(msg) {}
};

class IoError : public std::runtime_error {
public:
  explicit IoError(const std::string& msg) : std::runtime_error(msg) {}
};

class NumericError : public std::runtime_error {
public:
  explicit NumericError(const std::string& msg) : std::runtime_error(msg) {}
};

}  // namespace tsso
