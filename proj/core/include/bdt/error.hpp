#pragma once

#include <stdexcept>
#include <string>

namespace bdt {

// Stable error classes. The integer codes double as CLI exit statuses.
enum class ErrorCode : int {
  kConfig = 1,
  kInfeasible = 2,
  kOracleCap = 3,
  kIo = 4,
  kDomain = 5,
  kDegenerate = 6,
  kStabilization = 7,
  kDivergent = 8,
  kEmpty = 9,
};

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}
  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// Parameter outside the admissible range of a model or formula.
class DomainError : public Error {
 public:
  explicit DomainError(const std::string& what)
      : Error(ErrorCode::kDomain, what) {}
};

class DivergenceError : public Error {
 public:
  explicit DivergenceError(const std::string& what)
      : Error(ErrorCode::kDivergent, what) {}
};

class DegeneracyError : public Error {
 public:
  explicit DegeneracyError(const std::string& what)
      : Error(ErrorCode::kDegenerate, what) {}
};

class EmptyInputError : public Error {
 public:
  explicit EmptyInputError(const std::string& what)
      : Error(ErrorCode::kEmpty, what) {}
};

class OracleCapError : public Error {
 public:
  explicit OracleCapError(const std::string& what)
      : Error(ErrorCode::kOracleCap, what) {}
};

class StabilizationError : public Error {
 public:
  explicit StabilizationError(const std::string& what)
      : Error(ErrorCode::kStabilization, what) {}
};

// Carries the smallest failure budget that could be reached.
class InfeasibleError : public Error {
 public:
  InfeasibleError(const std::string& what, double best_delta)
      : Error(ErrorCode::kInfeasible, what), best_delta_(best_delta) {}
  double best_delta() const noexcept { return best_delta_; }

 private:
  double best_delta_;
};

class ConfigError : public Error {
 public:
  explicit ConfigError(const std::string& what)
      : Error(ErrorCode::kConfig, what) {}
};

class IoError : public Error {
 public:
  explicit IoError(const std::string& what) : Error(ErrorCode::kIo, what) {}
};

}  // namespace bdt
