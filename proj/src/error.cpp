#include "sce/error.hpp"

namespace sce {

std::string_view to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::NonFiniteEvaluation: return "NonFiniteEvaluation";
    case ErrorCode::InvalidWeight: return "InvalidWeight";
    case ErrorCode::InvalidKernel: return "InvalidKernel";
    case ErrorCode::InvalidMeshParams: return "InvalidMeshParams";
    case ErrorCode::NegativeInitialData: return "NegativeInitialData";
    case ErrorCode::StepRejected: return "StepRejected";
    case ErrorCode::StiffnessFailure: return "StiffnessFailure";
    case ErrorCode::InsufficientSamples: return "InsufficientSamples";
    case ErrorCode::ConcavityNotDetected: return "ConcavityNotDetected";
    case ErrorCode::NonFiniteRatio: return "NonFiniteRatio";
    case ErrorCode::InvalidParameters: return "InvalidParameters";
    case ErrorCode::EmptySeries: return "EmptySeries";
    case ErrorCode::InvalidSampler: return "InvalidSampler";
    case ErrorCode::RateOverflow: return "RateOverflow";
    case ErrorCode::ParseError: return "ParseError";
    case ErrorCode::ValidationError: return "ValidationError";
    case ErrorCode::IoError: return "IoError";
  }
  return "Unknown";
}

}  // namespace sce
