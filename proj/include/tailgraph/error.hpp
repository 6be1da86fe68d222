#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace tailgraph {

enum class ErrorCode {
  InvalidArgument,
  NotConnected,
  NotChordal,
  NotSPD,
  DimensionTooLarge,
  InvalidVariogram,
  NumericalBreakdown,
  IncompatibleSeparators,
  DegenerateCorrelation,
  NormingIncompatible,
  UnsupportedNormingFamily,
  NotBlockGraph,
  NormingUnavailable,
  UnsupportedCliqueShape,
  MissingNorming,
  EmptySubset,
  QuantileOutOfRange,
  ConfigError,
};

const char* to_string(ErrorCode code);

// Every failure raised by the library carries a code so callers (notably the
// CLI exit-code contract) can branch on the kind of failure.  `witness` holds
// a vertex list when the failure has a natural certificate, e.g. a chordless
// cycle for NotChordal.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message,
        std::vector<int> witness = {})
      : std::runtime_error(std::string(to_string(code)) + ": " + message),
        code_(code),
        witness_(std::move(witness)) {}

  ErrorCode code() const noexcept { return code_; }
  const std::vector<int>& witness() const noexcept { return witness_; }

 private:
  ErrorCode code_;
  std::vector<int> witness_;
};

}  // namespace tailgraph
