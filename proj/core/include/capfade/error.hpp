#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace capfade {

enum class ErrorKind {
  InvalidArgument,
  OutOfRange,
  InsufficientData,
  Parse,
  Io,
  DegenerateOutput,
  GenerationFailure,
  IllConditioned,
  TrainingFailure,
};

std::string_view to_string(ErrorKind kind) noexcept;

/// Single exception type for the library. The kind decides how callers
/// (the CLI in particular) classify the failure.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_{kind} {}

  ErrorKind kind() const noexcept { return kind_; }

  /// True for failures caused by numerics rather than by the input data.
  bool is_numeric() const noexcept {
    return kind_ == ErrorKind::DegenerateOutput ||
           kind_ == ErrorKind::GenerationFailure ||
           kind_ == ErrorKind::IllConditioned ||
           kind_ == ErrorKind::TrainingFailure;
  }

 private:
  ErrorKind kind_;
};

[[noreturn]] inline void fail(ErrorKind kind, const std::string& message) {
  throw Error(kind, message);
}

}  // namespace capfade
