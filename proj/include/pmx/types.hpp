#pragma once

#include <Eigen/Dense>

#include <complex>
#include <cstddef>
#include <functional>
#include <stdexcept>
#include <string>

namespace pmx {

using Complex = std::complex<double>;
using Matrix = Eigen::MatrixXcd;
using Vector = Eigen::VectorXcd;

/// Value of a field restricted to one grid segment. The segment index lets
/// piecewise data (interval indicators, post-jump values) pick the correct
/// one-sided limit at segment endpoints.
using MatrixField = std::function<Matrix(double t, std::size_t segment)>;
using VectorField = std::function<Vector(double t, std::size_t segment)>;

enum class ErrorCode {
  InvalidScenario,
  Parse,
  Io,
  IntegrationOverflow,
  SingularFundamental,
  NotSolvable,
  DegenerateBVP,
  ObservationMismatch,
  HasIntervals,
  SingularReduction,
  SingularQ,
  IllConditionedModel,
  ZeroSensitivity,
  ZeroControl,
  BudgetExceeded,
  NumericalInconsistency,
};

const char* to_string(ErrorCode code);

class Error : public std::runtime_error {
 public:
  Error(ErrorCode code, const std::string& message)
      : std::runtime_error(std::string(to_string(code)) + ": " + message), code_(code) {}

  ErrorCode code() const noexcept { return code_; }

 private:
  ErrorCode code_;
};

// (x, y) = sum_k x_k conj(y_k), linear in the first argument.
inline Complex inner(const Vector& x, const Vector& y) { return y.dot(x); }

}  // namespace pmx
