#pragma once

#include <stdexcept>
#include <string>

namespace streamforge {

// Error taxonomy shared across the runtime. Contract violations throw;
// recoverable conditions (truncated wire frames, refinement skips) are
// reported through return values instead.
enum class ErrorKind {
  kConfig,      // invalid SessionConfig or config file
  kDimension,   // latent dimension mismatch
  kCapacity,    // buffer admission past a fixed capacity
  kSchedule,    // noise level out of step with the ladder
  kSequencing,  // chunk id gap or reorder
  kState,       // operation invalid for the current state machine phase
  kTrace,       // interaction trace parse failure
  kProtocol,    // wire protocol violation
  kEngine,      // denoise engine failure, tick index attached
};

const char* to_string(ErrorKind kind);

class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(std::string(to_string(kind)) + ": " + message),
        kind_(kind) {}

  ErrorKind kind() const { return kind_; }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void raise(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace streamforge
