#pragma once

#include <stdexcept>
#include <string>

namespace hieract {

/// Failure category. The CLI maps each category onto a process exit code.
enum class ErrorCategory {
  kInvalidArgument,  // bad call-site input (shape, range, precondition)
  kData,             // malformed or inconsistent dataset / taxonomy input
  kConfig,           // malformed or unknown configuration
  kCheckpoint,       // missing, corrupt or tampered checkpoint
  kDivergence,       // non-finite loss or activation during training
  kIo,               // filesystem failure
};

const char* category_name(ErrorCategory category);

/// Process exit code for a category: config 2, checkpoint 3, divergence 4, other 1.
int exit_code_for(ErrorCategory category);

class Error : public std::runtime_error {
 public:
  Error(ErrorCategory category, const std::string& what)
      : std::runtime_error(what), category_(category) {}

  ErrorCategory category() const noexcept { return category_; }

 private:
  ErrorCategory category_;
};

[[noreturn]] void fail(ErrorCategory category, const std::string& message);

inline void require(bool condition, ErrorCategory category, const std::string& message) {
  if (!condition) fail(category, message);
}

}  // namespace hieract
