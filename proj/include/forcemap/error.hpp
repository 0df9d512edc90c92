#pragma once

#include <stdexcept>
#include <string>
#include <string_view>
#include <vector>

namespace forcemap {

enum class ErrorKind {
  InvalidArgument,
  DimensionMismatch,
  BadMagic,
  VersionMismatch,
  Truncated,
  TrailingData,
  NonFinite,
  Parse,
  Io,
  Config,
  UnknownBody,
  InvalidScene,
  OutsideGrid,
};

std::string_view to_string(ErrorKind kind);

// All recoverable failures in the library surface as this exception. The
// kind is stable and is what the CLI reports in its error JSON.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& message)
      : std::runtime_error(message), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

// Non-fatal notes collected during an operation (contacts outside the grid,
// bodies that could not be placed, poses missing from a log, ...).
using Diagnostics = std::vector<std::string>;

inline void note(Diagnostics* diagnostics, std::string message) {
  if (diagnostics != nullptr) diagnostics->push_back(std::move(message));
}

}  // namespace forcemap
