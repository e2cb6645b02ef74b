#pragma once

#include <stdexcept>
#include <string>

namespace dppl {

struct Error : std::runtime_error {
  using std::runtime_error::runtime_error;
};

// Shape or arity mismatch between operands.
struct ShapeError : Error {
  using Error::Error;
};

// A NaN or infinity surfaced at an operation boundary. Carries the name of
// the operation that produced it.
struct NonFiniteError : Error {
  explicit NonFiniteError(const std::string& op)
      : Error("non-finite value produced by '" + op + "'"), operation(op) {}
  std::string operation;
};

// HMC trajectory left the finite domain.
struct DivergenceError : Error {
  DivergenceError(int trajectory_, int step_)
      : Error("HMC divergence in trajectory " + std::to_string(trajectory_) +
              " at leapfrog step " + std::to_string(step_)),
        trajectory(trajectory_),
        step(step_) {}
  int trajectory;
  int step;
};

// Reverse-time reconstruction disagreed with the stored forward state.
struct ReconstructionError : Error {
  ReconstructionError(int trajectory_, double drift_)
      : Error("reverse reconstruction drift " + std::to_string(drift_) +
              " at trajectory " + std::to_string(trajectory_) +
              " exceeds the configured bound"),
        trajectory(trajectory_),
        drift(drift_) {}
  int trajectory;
  double drift;
};

}  // namespace dppl
