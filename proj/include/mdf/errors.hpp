#pragma once

#include <stdexcept>
#include <string>

namespace mdf {

// Bad arguments, malformed input files, out-of-contract data. CLI maps to exit 2.
class ValidationError : public std::invalid_argument {
 public:
  explicit ValidationError(const std::string& what) : std::invalid_argument(what) {}
};

// Numerical failure at runtime (non-PSD beyond tolerance, divergence). CLI maps to exit 3.
class NumericError : public std::runtime_error {
 public:
  explicit NumericError(const std::string& what) : std::runtime_error(what) {}
};

// Filesystem-level failure (unwritable path, short write). CLI maps to exit 3.
class IoError : public std::runtime_error {
 public:
  explicit IoError(const std::string& what) : std::runtime_error(what) {}
};

}  // namespace mdf
