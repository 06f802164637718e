#pragma once

#include <stdexcept>
#include <string>

namespace pathsum {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class GridMismatch : public Error {
 public:
  GridMismatch() : Error("operands live on different time grids") {}
};

class DimensionMismatch : public Error {
 public:
  explicit DimensionMismatch(const std::string& what) : Error("dimension mismatch: " + what) {}
};

// Raised when the implicit Volterra step becomes (nearly) singular.
class StepSizeError : public Error {
 public:
  explicit StepSizeError(const std::string& what) : Error(what + "; refine the time grid") {}
};

class ParseError : public Error {
 public:
  using Error::Error;
};

}  // namespace pathsum
