#include "tailgraph/error.hpp"

namespace tailgraph {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidArgument: return "InvalidArgument";
    case ErrorCode::NotConnected: return "NotConnected";
    case ErrorCode::NotChordal: return "NotChordal";
    case ErrorCode::NotSPD: return "NotSPD";
    case ErrorCode::DimensionTooLarge: return "DimensionTooLarge";
    case ErrorCode::InvalidVariogram: return "InvalidVariogram";
    case ErrorCode::NumericalBreakdown: return "NumericalBreakdown";
    case ErrorCode::IncompatibleSeparators: return "IncompatibleSeparators";
    case ErrorCode::DegenerateCorrelation: return "DegenerateCorrelation";
    case ErrorCode::NormingIncompatible: return "NormingIncompatible";
    case ErrorCode::UnsupportedNormingFamily: return "UnsupportedNormingFamily";
    case ErrorCode::NotBlockGraph: return "NotBlockGraph";
    case ErrorCode::NormingUnavailable: return "NormingUnavailable";
    case ErrorCode::UnsupportedCliqueShape: return "UnsupportedCliqueShape";
    case ErrorCode::MissingNorming: return "MissingNorming";
    case ErrorCode::EmptySubset: return "EmptySubset";
    case ErrorCode::QuantileOutOfRange: return "QuantileOutOfRange";
    case ErrorCode::ConfigError: return "ConfigError";
  }
  return "Unknown";
}

}  // namespace tailgraph
