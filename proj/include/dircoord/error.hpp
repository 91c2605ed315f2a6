#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dircoord {

enum class ErrorKind {
  NotInImage,
  NearPiSingularity,
  NegativeRange,
  NotPSD,
  MeanAtOrigin,
  GimbalPole,
  OriginSingularity,
  ZeroRange,
  SingularInnovation,
  SingularCovariance,
  Degenerate,
  DuplicatePoints,
  MisalignedTimestamps,
  RejectionLimit,
  ParseError,
  NonMonotoneTime,
  ConfigError,
  IoError,
};

std::string_view to_string(ErrorKind kind);

// Every library failure is reported as an Error carrying its category, so
// callers (the CLI in particular) can map it to a categorized message.
class Error : public std::runtime_error {
 public:
  Error(ErrorKind kind, const std::string& what)
      : std::runtime_error(std::string(to_string(kind)) + ": " + what), kind_(kind) {}

  ErrorKind kind() const noexcept { return kind_; }

 private:
  ErrorKind kind_;
};

}  // namespace dircoord
