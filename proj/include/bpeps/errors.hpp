#pragma once

#include <stdexcept>
#include <string>

namespace bpeps {

struct ArgumentError : std::invalid_argument {
  using std::invalid_argument::invalid_argument;
};

// Requested dense dimension is above the configured cap.
struct CapacityError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

struct ConvergenceError : std::runtime_error {
  ConvergenceError(const std::string& what, double best)
      : std::runtime_error(what), best_residual(best) {}
  double best_residual;
};

struct InvariantError : std::logic_error {
  using std::logic_error::logic_error;
};

struct DegenerateStateError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Unreadable, corrupted or version-incompatible snapshot.
struct SnapshotError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace bpeps
