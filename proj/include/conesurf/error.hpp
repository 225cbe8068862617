#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace conesurf {

enum class ErrorCode {
  ParseError,
  EdgeLengthMismatch,
  UnmatchedEdge,
  DuplicateGluing,
  NonSimplePolygon,
  OrientationError,
  DisconnectedSurface,
  InvalidMarking,
  UnknownVertexClass,
  StartOutsideSurface,
  ZeroDirection,
  IncomparableTraces,
  AngleOutOfRange,
  DomainError,
  UnfoldingBudgetExceeded,
  EndpointMismatch,
  NotClosed,
  NoSmallSingularities,
  InvalidPermutation,
  BranchPointOnPath,
  InvalidArgument,
};

constexpr std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::EdgeLengthMismatch: return "EdgeLengthMismatch";
    case ErrorCode::UnmatchedEdge: return "UnmatchedEdge";
    case ErrorCode::DuplicateGluing: return "DuplicateGluing";
    case ErrorCode::NonSimplePolygon: return "NonSimplePolygon";
    case ErrorCode::OrientationError: return "OrientationError";
    case ErrorCode::DisconnectedSurface: return "DisconnectedSurface";
    case ErrorCode::InvalidMarking: return "InvalidMarking";
    case ErrorCode::UnknownVertexClass: return "UnknownVertexClass";
    case ErrorCode::StartOutsideSurface: return "StartOutsideSurface";
    case ErrorCode::ZeroDirection: return "ZeroDirection";
    case ErrorCode::IncomparableTraces: return "IncomparableTraces";
    case ErrorCode::AngleOutOfRange: return "AngleOutOfRange";
    case ErrorCode::DomainError: return "DomainError";
    case ErrorCode::UnfoldingBudgetExceeded: return "UnfoldingBudgetExceeded";
    case ErrorCode::EndpointMismatch: return "EndpointMismatch";
    case ErrorCode::NotClosed: return "NotClosed";
    case ErrorCode::NoSmallSingularities: return "NoSmallSingularities";
    case ErrorCode::InvalidPermutation: return "InvalidPermutation";
    case ErrorCode::BranchPointOnPath: return "BranchPointOnPath";
    case ErrorCode::InvalidArgument: return "InvalidArgument";
  }
  return "Unknown";
}

/// Every failure the library reports carries one of the codes above; the
/// message names the offending element (polygon id, edge index, flag...).
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace conesurf
