#pragma once

#include <stdexcept>
#include <string>

namespace doclayout {

// Exception hierarchy. The CLI maps each kind onto a process exit code.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
  virtual int exit_code() const noexcept { return 1; }
};

// Input violates a domain invariant (bounds, ranges, schema agreement).
class ValidationError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 2; }
};

// Input could not be parsed or is structurally malformed.
class FormatError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 3; }
};

// A numerical routine failed (NaN loss, infeasible transport, ...).
class NumericalError : public Error {
 public:
  using Error::Error;
  int exit_code() const noexcept override { return 4; }
};

}  // namespace doclayout
