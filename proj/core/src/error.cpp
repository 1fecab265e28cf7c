#include "capfade/error.hpp"

namespace capfade {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "invalid-argument";
    case ErrorKind::OutOfRange: return "out-of-range";
    case ErrorKind::InsufficientData: return "insufficient-data";
    case ErrorKind::Parse: return "parse-error";
    case ErrorKind::Io: return "io-error";
    case ErrorKind::DegenerateOutput: return "degenerate-output";
    case ErrorKind::GenerationFailure: return "generation-failure";
    case ErrorKind::IllConditioned: return "ill-conditioned";
    case ErrorKind::TrainingFailure: return "training-failure";
  }
  return "unknown";
}

}  // namespace capfade
