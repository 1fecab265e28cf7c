#pragma once

#include <stdexcept>
#include <string>

namespace capfade::cli {

/// Bad flags, settings or config files; exit code 1.
class UsageError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

}  // namespace capfade::cli
