/// @file errors.hpp
/// @brief Exception types shared across the library.
#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace lagrflow {

/// Malformed expression text; `offset` is the byte offset of the problem.
class ParseError : public std::runtime_error {
 public:
  ParseError(const std::string& what, std::size_t offset)
      : std::runtime_error(what + " (byte " + std::to_string(offset) + ")"),
        offset_(offset) {}
  std::size_t offset() const { return offset_; }

 private:
  std::size_t offset_;
};

/// Invalid configuration: unknown family, inadmissible constants, missing
/// fields, malformed domains.  Maps to CLI exit code 2.
class ConfigError : public std::runtime_error {
 public:
  explicit ConfigError(const std::string& what) : std::runtime_error(what) {}
};

/// Numerical machinery failed outright (integrator collapse, Newton
/// divergence past retries).  Distinct from a verification FAIL, which is
/// reported, not thrown.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace lagrflow
