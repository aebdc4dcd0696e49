#include "svim/error.hpp"

namespace svim {

const char* to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidCoordinate: return "invalid-coordinate";
    case ErrorCode::DegenerateGeometry: return "degenerate-geometry";
    case ErrorCode::Range: return "range";
    case ErrorCode::InvalidSpec: return "invalid-spec";
    case ErrorCode::InvalidDetection: return "invalid-detection";
    case ErrorCode::Config: return "config";
    case ErrorCode::DegenerateObject: return "degenerate-object";
    case ErrorCode::Pole: return "pole";
    case ErrorCode::IllConditioned: return "ill-conditioned-pair";
    case ErrorCode::DivergentRays: return "divergent-rays";
    case ErrorCode::InvalidObservation: return "invalid-observation";
    case ErrorCode::NoMeasurement: return "no-measurement";
    case ErrorCode::InvalidDepth: return "invalid-depth";
    case ErrorCode::NoTrunk: return "no-trunk";
    case ErrorCode::AmbiguousMask: return "ambiguous-mask";
    case ErrorCode::PairingRejected: return "pairing-rejected";
    case ErrorCode::NotVisible: return "not-visible";
    case ErrorCode::InvalidScene: return "invalid-scene";
    case ErrorCode::Schema: return "schema";
    case ErrorCode::Io: return "io";
  }
  return "unknown";
}

}  // namespace svim
