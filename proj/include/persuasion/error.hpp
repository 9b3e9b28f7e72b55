#pragma once

#include <stdexcept>
#include <string>

namespace persuasion {

/// Malformed input or an unmet precondition (CLI exit code 1).
class ValidationError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// A numerical failure on otherwise valid input (CLI exit code 2).
class NumericalError : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// First-stage contrast too small to divide by.
class WeakFirstStageError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Conditioning subpopulation has (estimated) zero mass.
class ZeroMassError : public NumericalError {
 public:
  using NumericalError::NumericalError;
};

/// Simplex least-squares solver hit its iteration cap.
class ConvergenceError : public NumericalError {
 public:
  ConvergenceError(const std::string& what, double residual, double gradient_norm)
      : NumericalError(what), residual_(residual), gradient_norm_(gradient_norm) {}

  double residual() const { return residual_; }
  double gradient_norm() const { return gradient_norm_; }

 private:
  double residual_;
  double gradient_norm_;
};

}  // namespace persuasion
