#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace drsync {

enum class Errc {
  backward_extrapolation,
  out_of_range,
  clock,
  alignment,
  input,
  empty_input,
  insufficient_data,
  undefined_correlation,
  lag_range,
  lookup,
  degenerate_data,
  validation,
  io,
};

const char* to_string(Errc code) noexcept;

/// Base exception for every failure raised by the library. The code tells
/// callers (and the CLI exit-code mapping) which contract was violated.
class Error : public std::runtime_error {
 public:
  Error(Errc code, const std::string& what) : std::runtime_error(what), code_(code) {}
  Errc code() const noexcept { return code_; }

 private:
  Errc code_;
};

/// Raised by config validation. Collects every violated field rather than
/// stopping at the first one.
class ValidationError : public Error {
 public:
  explicit ValidationError(std::vector<std::string> violations);
  const std::vector<std::string>& violations() const noexcept { return violations_; }

 private:
  std::vector<std::string> violations_;
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(Errc::io, what) {}
};

}  // namespace drsync
