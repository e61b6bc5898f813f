#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dplab {

enum class ErrorCode {
  InvalidArgument,
  // exponents
  DimensionTooSmall,
  ExponentOrder,
  GapTooWide,
  GapTooWideForEmbedding,
  NonpositiveVartheta,
  // mesh
  EmptyRegion,
  DegenerateGap,
  CylinderOutOfRange,
  // doublephase
  NegativeArgument,
  EmptySampleSet,
  // solver
  PicardDiverged,
  CgStalled,
  TestNotCompactlySupported,
  // estimates
  LevelSignMismatch,
  SmallnessViolated,
  // harness
  InsufficientPoints,
  ConfigInvalid,
  Io,
};

std::string_view to_string(ErrorCode code);

/// Every failure raised by the library carries one of the codes above.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  [[nodiscard]] ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

#define DPLAB_THROW_IF(cond, code, msg)          \
  do {                                           \
    if (cond) throw ::dplab::Error((code), (msg)); \
  } while (false)

}  // namespace dplab
