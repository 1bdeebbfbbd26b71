#pragma once

#include <stdexcept>
#include <string>

namespace pxlap {

/// Base class for every failure the library reports. `code()` is a stable
/// machine-readable tag used in the CLI's structured error output.
class Error : public std::runtime_error {
 public:
  Error(std::string code, const std::string& what)
      : std::runtime_error(what), code_(std::move(code)) {}

  const std::string& code() const noexcept { return code_; }

 private:
  std::string code_;
};

class InvalidArgument : public Error {
 public:
  explicit InvalidArgument(const std::string& what) : Error("InvalidArgument", what) {}
};

class HypothesisViolation : public Error {
 public:
  explicit HypothesisViolation(const std::string& what) : Error("HypothesisViolation", what) {}
};

class NonConvergence : public Error {
 public:
  explicit NonConvergence(const std::string& what) : Error("NonConvergence", what) {}
};

class BelowFloor : public Error {
 public:
  explicit BelowFloor(const std::string& what) : Error("BelowFloor", what) {}
};

class NoProjection : public Error {
 public:
  explicit NoProjection(const std::string& what) : Error("NoProjection", what) {}
};

class AllFail : public Error {
 public:
  explicit AllFail(const std::string& what) : Error("AllFail", what) {}
};

class DegenerateExponents : public Error {
 public:
  explicit DegenerateExponents(const std::string& what) : Error("DegenerateExponents", what) {}
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what) : Error("ConfigError", what) {}
};

}  // namespace pxlap
