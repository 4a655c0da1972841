#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace fleetroll {

enum class ErrorCode {
  InvalidEdge,
  NotStronglyConnected,
  InvalidNode,
  SameNode,
  SameSector,
  SectorsUnassigned,
  EmptyLog,
  DomainMismatch,
  InvalidDistribution,
  TooLarge,
  IllegalControl,
  ConflictingControl,
  KExceedsNodes,
  MarginalMismatch,
  MissingCoordinates,
  TooFewTraces,
  InvalidArgument,
  Parse,
  Io,
};

std::string_view to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

inline std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidEdge: return "InvalidEdge";
    case ErrorCode::NotStronglyConnected: return "NotStronglyConnected";
    case ErrorCode::InvalidNode: return "InvalidNode";
    case ErrorCode::SameNode: return "SameNode";
    case ErrorCode::SameSector: return "SameSector";
    case ErrorCode::SectorsUnassigned: return "SectorsUnassigned";
    case ErrorCode::EmptyLog: return "EmptyLog";
    case ErrorCode::DomainMismatch: return "DomainMismatch";
    case ErrorCode::InvalidDistribution: return "InvalidDistribution";
    case ErrorCode::TooLarge: return "TooLarge";
    case ErrorCode::IllegalControl: return "IllegalControl";
    case ErrorCode::ConflictingControl: return "ConflictingControl";
    case ErrorCode::KExceedsNodes: return "KExceedsNodes";
    case ErrorCode::MarginalMismatch: return "MarginalMismatch";
    case ErrorCode::MissingCoordinates: return "MissingCoordinates";
    case ErrorCode::TooFewTraces: return "TooFewTraces";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::Parse: return "Parse";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace fleetroll
