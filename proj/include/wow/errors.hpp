#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>

namespace wow {

// Shape or argument violations: dimension/count mismatches, bad parameters.
struct InputError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Sinkhorn failed to reach the marginal tolerance within max_iter.
struct ConvergenceError : std::runtime_error {
  double marginal_violation;
  ConvergenceError(const std::string& msg, double violation)
      : std::runtime_error(msg), marginal_violation(violation) {}
};

// Malformed on-disk data (IDX, WOWDS1, WOWNN1).
struct FormatError : std::runtime_error {
  std::uint64_t byte_offset;
  FormatError(const std::string& msg, std::uint64_t offset)
      : std::runtime_error(msg + " (at byte offset " + std::to_string(offset) + ")"),
        byte_offset(offset) {}
};

// Non-finite state during integration or training.
struct NumericError : std::runtime_error {
  long step_index;
  NumericError(const std::string& msg, long step)
      : std::runtime_error(msg), step_index(step) {}
};

}  // namespace wow
