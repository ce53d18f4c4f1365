#pragma once

#include "pmx/types.hpp"

#include <vector>

namespace pmx {

/// One harmonic of a trigonometric polynomial: C cos(2 pi k t / T) + S sin(2 pi k t / T).
struct Harmonic {
  int k = 0;
  Matrix cos_coeff;
  Matrix sin_coeff;
};

/// T-periodic matrix-valued function of time.
///
/// Three representations are supported: a constant matrix, a trigonometric
/// polynomial, and uniform samples over one period with linear interpolation
/// and wraparound (sample s sits at t = s T / K). Every form is evaluated at
/// t reduced modulo the period. Sums of providers are closed under addition,
/// so a provider may mix parts of several forms.
class MatrixFunction {
 public:
  enum class Form { Constant, Fourier, Grid, Mixed };

  MatrixFunction() = default;

  static MatrixFunction constant(double period, Matrix value);
  static MatrixFunction fourier(double period, std::vector<Harmonic> terms);
  static MatrixFunction grid(double period, std::vector<Matrix> samples);
  static MatrixFunction zero(double period, Eigen::Index rows, Eigen::Index cols);

  Matrix operator()(double t) const;
  Vector vector_at(double t) const;  // requires cols() == 1

  Eigen::Index rows() const { return rows_; }
  Eigen::Index cols() const { return cols_; }
  double period() const { return period_; }
  Form form() const { return form_; }
  bool empty() const { return rows_ == 0 && cols_ == 0; }

  const Matrix& constant_part() const { return constant_; }
  const std::vector<Harmonic>& harmonics() const { return harmonics_; }
  const std::vector<std::vector<Matrix>>& grids() const { return grids_; }

  MatrixFunction operator+(const MatrixFunction& other) const;
  MatrixFunction scaled(Complex factor) const;

  /// Reduces t into [0, T).
  double reduce(double t) const;

 private:
  double period_ = 1.0;
  Eigen::Index rows_ = 0;
  Eigen::Index cols_ = 0;
  Form form_ = Form::Constant;
  Matrix constant_;
  std::vector<Harmonic> harmonics_;
  std::vector<std::vector<Matrix>> grids_;
};

}  // namespace pmx
