#include "lissnas/error.hpp"

namespace lissnas {

std::string_view to_string(ErrorKind kind) noexcept {
  switch (kind) {
    case ErrorKind::InvalidArgument: return "InvalidArgument";
    case ErrorKind::SpaceMismatch: return "SpaceMismatch";
    case ErrorKind::TooLarge: return "TooLarge";
    case ErrorKind::NoLegalMove: return "NoLegalMove";
    case ErrorKind::RejectionOverflow: return "RejectionOverflow";
    case ErrorKind::LengthMismatch: return "LengthMismatch";
    case ErrorKind::EmptySnapshot: return "EmptySnapshot";
    case ErrorKind::MemoryCap: return "MemoryCap";
    case ErrorKind::ParseError: return "ParseError";
    case ErrorKind::SpecViolation: return "SpecViolation";
    case ErrorKind::EmptyBenchmark: return "EmptyBenchmark";
    case ErrorKind::MissingKey: return "MissingKey";
    case ErrorKind::SingularSystem: return "SingularSystem";
    case ErrorKind::BudgetExhaustedBeforeFirstIteration: return "BudgetExhaustedBeforeFirstIteration";
    case ErrorKind::ZeroVariance: return "ZeroVariance";
    case ErrorKind::DomainError: return "DomainError";
    case ErrorKind::EmptyInput: return "EmptyInput";
    case ErrorKind::TooFewObservations: return "TooFewObservations";
    case ErrorKind::TooFew: return "TooFew";
  }
  return "Unknown";
}

}  // namespace lissnas
