#include "cbp/error.hpp"

namespace cbp {

std::string_view to_string(ErrorCode code) noexcept {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::TailTooHeavy: return "TailTooHeavy";
    case ErrorCode::UnsupportedMoment: return "UnsupportedMoment";
    case ErrorCode::OutsideSimplex: return "OutsideSimplex";
    case ErrorCode::Unidentifiable: return "Unidentifiable";
    case ErrorCode::AllZero: return "AllZero";
    case ErrorCode::EmptyIndexSet: return "EmptyIndexSet";
    case ErrorCode::MissingProgenitors: return "MissingProgenitors";
    case ErrorCode::ZeroPopulation: return "ZeroPopulation";
    case ErrorCode::SupportOverflow: return "SupportOverflow";
    case ErrorCode::NumericalInstability: return "NumericalInstability";
    case ErrorCode::ImpossibleTransition: return "ImpossibleTransition";
    case ErrorCode::DegenerateIncrement: return "DegenerateIncrement";
    case ErrorCode::MissingMoment: return "MissingMoment";
    case ErrorCode::InvalidMixing: return "InvalidMixing";
    case ErrorCode::NotLinearlyDivisible: return "NotLinearlyDivisible";
    case ErrorCode::SchemaViolation: return "SchemaViolation";
    case ErrorCode::BootstrapFailure: return "BootstrapFailure";
    case ErrorCode::Io: return "Io";
  }
  return "Unknown";
}

}  // namespace cbp
