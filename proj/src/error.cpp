#include "platoon/error.hpp"

namespace platoon {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::kInvalidInput: return "invalid input";
    case ErrorCode::kUndefinedRate: return "undefined rate";
    case ErrorCode::kInsufficientData: return "insufficient data";
    case ErrorCode::kDimensionMismatch: return "dimension mismatch";
    case ErrorCode::kUnstableTransferFunction: return "unstable transfer function";
    case ErrorCode::kNoSolution: return "no solution";
    case ErrorCode::kDivergence: return "divergence";
    case ErrorCode::kEnumerationLimit: return "enumeration limit";
    case ErrorCode::kMalformedMap: return "malformed map";
    case ErrorCode::kInversion: return "inversion error";
    case ErrorCode::kConfig: return "config error";
    case ErrorCode::kIo: return "io error";
  }
  return "unknown";
}

}  // namespace platoon
