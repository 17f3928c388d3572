#pragma once

#include <stdexcept>
#include <string>

namespace platoon {

enum class ErrorCode {
  kInvalidInput,
  kUndefinedRate,
  kInsufficientData,
  kDimensionMismatch,
  kUnstableTransferFunction,
  kNoSolution,
  kDivergence,
  kEnumerationLimit,
  kMalformedMap,
  kInversion,
  kConfig,
  kIo,
};

const char* to_string(ErrorCode code) noexcept;

/// Single exception type thrown by the core library. The C API maps `code()`
/// onto its status enum.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

/// Thrown by the simulator when a state leaves the divergence guard.
class DivergenceError : public Error {
 public:
  DivergenceError(std::size_t step, const std::string& what)
      : Error(ErrorCode::kDivergence, what), step_(step) {}

  std::size_t step() const noexcept { return step_; }

 private:
  std::size_t step_;
};

}  // namespace platoon
