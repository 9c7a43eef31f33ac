#pragma once

#include <stdexcept>
#include <string>

namespace summix {

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Two dimensions that must agree did not.
class DimensionError : public Error {
 public:
  DimensionError(const std::string& where, const std::string& lhs_name,
                 std::size_t lhs, const std::string& rhs_name, std::size_t rhs)
      : Error(where + ": " + lhs_name + " = " + std::to_string(lhs) +
              " does not match " + rhs_name + " = " + std::to_string(rhs)),
        lhs_(lhs),
        rhs_(rhs) {}

  std::size_t lhs() const { return lhs_; }
  std::size_t rhs() const { return rhs_; }

 private:
  std::size_t lhs_;
  std::size_t rhs_;
};

// Rejected configuration or construction arguments.
class ConfigError : public Error {
 public:
  using Error::Error;
};

// Non-finite values where finite ones are required.
class NumericError : public Error {
 public:
  using Error::Error;
};

// An oracle refused to run because the problem exceeds its size cap.
class CapacityError : public Error {
 public:
  using Error::Error;
};

}  // namespace summix
