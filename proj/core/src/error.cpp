#include "hieract/error.hpp"

namespace hieract {

const char* category_name(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kInvalidArgument: return "invalid-argument";
    case ErrorCategory::kData: return "data";
    case ErrorCategory::kConfig: return "config";
    case ErrorCategory::kCheckpoint: return "checkpoint";
    case ErrorCategory::kDivergence: return "divergence";
    case ErrorCategory::kIo: return "io";
  }
  return "unknown";
}

int exit_code_for(ErrorCategory category) {
  switch (category) {
    case ErrorCategory::kConfig: return 2;
    case ErrorCategory::kCheckpoint: return 3;
    case ErrorCategory::kDivergence: return 4;
    default: return 1;
  }
}

void fail(ErrorCategory category, const std::string& message) {
  throw Error(category, message);
}

}  // namespace hieract
