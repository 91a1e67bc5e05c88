#pragma once

#include <stdexcept>
#include <string>

namespace specsense {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Matrices or vectors whose shapes do not fit together.
class DimensionError : public Error {
 public:
  using Error::Error;
};

// A domain type was constructed with values outside its valid region.
class InvariantError : public Error {
 public:
  InvariantError(std::string invariant, const std::string& detail)
      : Error("invariant '" + invariant + "' violated: " + detail),
        invariant_(std::move(invariant)) {}

  const std::string& invariant() const noexcept { return invariant_; }

 private:
  std::string invariant_;
};

class InstabilityError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  using Error::Error;
};

// Out-of-range query against a sampled trajectory.
class QueryError : public Error {
 public:
  using Error::Error;
};

}  // namespace specsense
