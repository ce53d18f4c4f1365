#include "pmx/matrix_function.hpp"

#include <cmath>
#include <numbers>

namespace pmx {

const char* to_string(ErrorCode code) {
  switch (code) {
    case ErrorCode::InvalidScenario: return "InvalidScenario";
    case ErrorCode::Parse: return "ParseError";
    case ErrorCode::Io: return "IoError";
    case ErrorCode::IntegrationOverflow: return "IntegrationOverflow";
    case ErrorCode::SingularFundamental: return "SingularFundamental";
    case ErrorCode::NotSolvable: return "NotSolvable";
    case ErrorCode::DegenerateBVP: return "DegenerateBVP";
    case ErrorCode::ObservationMismatch: return "ObservationMismatch";
    case ErrorCode::HasIntervals: return "HasIntervals";
    case ErrorCode::SingularReduction: return "SingularReduction";
    case ErrorCode::SingularQ: return "SingularQ";
    case ErrorCode::IllConditionedModel: return "IllConditionedModel";
    case ErrorCode::ZeroSensitivity: return "ZeroSensitivity";
    case ErrorCode::ZeroControl: return "ZeroControl";
    case ErrorCode::BudgetExceeded: return "BudgetExceeded";
    case ErrorCode::NumericalInconsistency: return "NumericalInconsistency";
  }
  return "Unknown";
}

MatrixFunction MatrixFunction::constant(double period, Matrix value) {
  MatrixFunction f;
  f.period_ = period;
  f.rows_ = value.rows();
  f.cols_ = value.cols();
  f.form_ = Form::Constant;
  f.constant_ = std::move(value);
  return f;
}

MatrixFunction MatrixFunction::zero(double period, Eigen::Index rows, Eigen::Index cols) {
  return constant(period, Matrix::Zero(rows, cols));
}

MatrixFunction MatrixFunction::fourier(double period, std::vector<Harmonic> terms) {
  if (terms.empty()) throw Error(ErrorCode::InvalidScenario, "fourier provider needs at least one term");
  MatrixFunction f;
  f.period_ = period;
  f.rows_ = terms.front().cos_coeff.rows();
  f.cols_ = terms.front().cos_coeff.cols();
  f.form_ = Form::Fourier;
  f.constant_ = Matrix::Zero(f.rows_, f.cols_);
  for (auto& h : terms) {
    if (h.sin_coeff.size() == 0) h.sin_coeff = Matrix::Zero(f.rows_, f.cols_);
    if (h.cos_coeff.rows() != f.rows_ || h.cos_coeff.cols() != f.cols_ ||
        h.sin_coeff.rows() != f.rows_ || h.sin_coeff.cols() != f.cols_) {
      throw Error(ErrorCode::InvalidScenario, "fourier coefficient shapes disagree");
    }
    if (h.k < 0) throw Error(ErrorCode::InvalidScenario, "negative harmonic index");
  }
  f.harmonics_ = std::move(terms);
  return f;
}

MatrixFunction MatrixFunction::grid(double period, std::vector<Matrix> samples) {
  if (samples.size() < 2) throw Error(ErrorCode::InvalidScenario, "grid provider needs at least 2 samples");
  MatrixFunction f;
  f.period_ = period;
  f.rows_ = samples.front().rows();
  f.cols_ = samples.front().cols();
  for (const auto& s : samples) {
    if (s.rows() != f.rows_ || s.cols() != f.cols_) {
      throw Error(ErrorCode::InvalidScenario, "grid sample shapes disagree");
    }
  }
  f.form_ = Form::Grid;
  f.constant_ = Matrix::Zero(f.rows_, f.cols_);
  f.grids_.push_back(std::move(samples));
  return f;
}

double MatrixFunction::reduce(double t) const {
  if (t >= 0.0 && t < period_) return t;
  double r = std::fmod(t, period_);
  if (r < 0.0) r += period_;
  if (r >= period_) r = 0.0;
  return r;
}

Matrix MatrixFunction::operator()(double t) const {
  const double s = reduce(t);
  Matrix out = constant_.size() ? constant_ : Matrix::Zero(rows_, cols_);
  if (!harmonics_.empty()) {
    const double w = 2.0 * std::numbers::pi * s / period_;
    for (const auto& h : harmonics_) {
      if (h.k == 0) {
        out += h.cos_coeff;
        continue;
      }
      out += h.cos_coeff * std::cos(h.k * w) + h.sin_coeff * std::sin(h.k * w);
    }
  }
  for (const auto& samples : grids_) {
    const auto count = samples.size();
    const double pos = s / period_ * static_cast<double>(count);
    auto lo = static_cast<std::size_t>(std::floor(pos));
    if (lo >= count) lo = count - 1;
    const double frac = pos - static_cast<double>(lo);
    const auto hi = (lo + 1) % count;
    out += (1.0 - frac) * samples[lo] + frac * samples[hi];
  }
  return out;
}

Vector MatrixFunction::vector_at(double t) const {
  Matrix m = (*this)(t);
  return Eigen::Map<const Vector>(m.data(), m.rows());
}

MatrixFunction MatrixFunction::operator+(const MatrixFunction& other) const {
  if (empty()) return other;
  if (other.empty()) return *this;
  if (rows_ != other.rows_ || cols_ != other.cols_) {
    throw Error(ErrorCode::InvalidScenario, "provider shapes disagree in sum");
  }
  MatrixFunction f = *this;
  f.constant_ = (constant_.size() ? constant_ : Matrix::Zero(rows_, cols_)) +
                (other.constant_.size() ? other.constant_ : Matrix::Zero(rows_, cols_));
  f.harmonics_.insert(f.harmonics_.end(), other.harmonics_.begin(), other.harmonics_.end());
  f.grids_.insert(f.grids_.end(), other.grids_.begin(), other.grids_.end());
  f.form_ = form_ == other.form_ ? form_ : Form::Mixed;
  if (form_ == Form::Constant && other.form_ == Form::Fourier) f.form_ = Form::Fourier;
  if (form_ == Form::Fourier && other.form_ == Form::Constant) f.form_ = Form::Fourier;
  return f;
}

MatrixFunction MatrixFunction::scaled(Complex factor) const {
  MatrixFunction f = *this;
  if (f.constant_.size()) f.constant_ *= factor;
  for (auto& h : f.harmonics_) {
    h.cos_coeff *= factor;
    h.sin_coeff *= factor;
  }
  for (auto& samples : f.grids_) {
    for (auto& s : samples) s *= factor;
  }
  return f;
}

}  // namespace pmx
