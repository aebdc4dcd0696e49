#pragma once

#include <stdexcept>
#include <string>

namespace svim {

enum class ErrorCode {
  InvalidCoordinate,
  DegenerateGeometry,
  Range,
  InvalidSpec,
  InvalidDetection,
  Config,
  DegenerateObject,
  Pole,
  IllConditioned,
  DivergentRays,
  InvalidObservation,
  NoMeasurement,
  InvalidDepth,
  NoTrunk,
  AmbiguousMask,
  PairingRejected,
  NotVisible,
  InvalidScene,
  Schema,
  Io,
};

const char* to_string(ErrorCode code) noexcept;

/// Exception carrying a machine-readable category; the CLI maps categories to exit codes.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace svim
