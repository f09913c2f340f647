#include "mcdl/common.hpp"

namespace mcdl {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::invalid_argument: return "invalid argument";
    case ErrorCode::dimension_mismatch: return "dimension mismatch";
    case ErrorCode::non_finite: return "non-finite value";
    case ErrorCode::zero_label_column: return "sample without labels";
    case ErrorCode::io_failure: return "i/o failure";
    case ErrorCode::bad_magic: return "bad magic";
    case ErrorCode::truncated_payload: return "truncated payload";
    case ErrorCode::dimension_overflow: return "dimension overflow";
    case ErrorCode::numerical_failure: return "numerical failure";
  }
  return "unknown error";
}

Error::Error(ErrorCode code, const std::string& message)
    : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

void fail(ErrorCode code, const std::string& message) { throw Error(code, message); }

std::string shape_string(const Matrix& m) {
  return std::to_string(m.rows()) + "x" + std::to_string(m.cols());
}

}  // namespace mcdl
