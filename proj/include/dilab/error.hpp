#pragma once

#include <stdexcept>
#include <string>
#include <string_view>

namespace dilab {

enum class ErrorCode {
  InvalidArgument,
  NonHermitian,
  NotPSD,
  ShapeMismatch,
  ArityMismatch,
  NonCommutingTuple,
  NotBmContraction,
  NotDoublyCommuting,
  TailBoundTooLarge,
  AxisOutOfRange,
  PointOutsideDisc,
  NotInvariant,
  NotCoinvariant,
  NotC0,
  NotCommuting,
  NotProjection,
  SpectralRadiusTooLarge,
  NotKContractive,
  Schema,
};

std::string_view to_string(ErrorCode code);

// Every failure raised by the library carries one of the codes above so that
// front ends can map it onto an exit status without parsing messages.
class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& what)
      : std::runtime_error(std::string(to_string(code)) + ": " + what), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

}  // namespace dilab
