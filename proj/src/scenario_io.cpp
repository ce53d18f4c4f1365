#include "pmx/scenario_io.hpp"

#include <algorithm>
#include <fstream>
#include <sstream>

namespace pmx {

namespace {

[[noreturn]] void parse_fail(const std::string& what) { throw Error(ErrorCode::Parse, what); }

void expect_shape(const Matrix& m, Eigen::Index rows, Eigen::Index cols, const char* what) {
  if ((rows >= 0 && m.rows() != rows) || (cols >= 0 && m.cols() != cols)) {
    std::ostringstream os;
    os << what << ": expected " << rows << "x" << cols << ", got " << m.rows() << "x" << m.cols();
    parse_fail(os.str());
  }
}

const Json& require(const Json& j, const char* key) {
  if (!j.is_object() || !j.contains(key)) parse_fail(std::string("missing key '") + key + "'");
  return j.at(key);
}

}  // namespace

Complex complex_from_json(const Json& j) {
  if (j.is_number()) return {j.get<double>(), 0.0};
  if (j.is_array() && j.size() == 2 && j[0].is_number() && j[1].is_number()) {
    return {j[0].get<double>(), j[1].get<double>()};
  }
  parse_fail("complex entry must be a number or [re, im], got " + j.dump());
}

Json complex_to_json(Complex z) {
  if (z.imag() == 0.0) return z.real();
  return Json::array({z.real(), z.imag()});
}

Matrix matrix_from_json(const Json& j, Eigen::Index rows, Eigen::Index cols) {
  Matrix m;
  if (j.is_number()) {
    m = Matrix::Constant(1, 1, complex_from_json(j));
  } else if (j.is_array() && !j.empty() && std::all_of(j.begin(), j.end(), [](const Json& e) { return e.is_array(); })) {
    // Inside a matrix literal every nested array is a row; entries are
    // numbers or [re, im].
    const auto r = static_cast<Eigen::Index>(j.size());
    const auto c = static_cast<Eigen::Index>(j[0].size());
    m.resize(r, c);
    for (Eigen::Index i = 0; i < r; ++i) {
      if (static_cast<Eigen::Index>(j[i].size()) != c) parse_fail("ragged matrix literal");
      for (Eigen::Index k = 0; k < c; ++k) m(i, k) = complex_from_json(j[i][k]);
    }
  } else if (j.is_array() && !j.empty()) {
    // Flat list of numbers: a column.
    m.resize(static_cast<Eigen::Index>(j.size()), 1);
    for (std::size_t i = 0; i < j.size(); ++i) m(static_cast<Eigen::Index>(i), 0) = complex_from_json(j[i]);
  } else {
    parse_fail("matrix literal expected, got " + j.dump());
  }
  expect_shape(m, rows, cols, "matrix");
  return m;
}

Json matrix_to_json(const Matrix& m) {
  Json rows = Json::array();
  for (Eigen::Index i = 0; i < m.rows(); ++i) {
    Json row = Json::array();
    for (Eigen::Index k = 0; k < m.cols(); ++k) row.push_back(complex_to_json(m(i, k)));
    rows.push_back(std::move(row));
  }
  return rows;
}

Vector vector_from_json(const Json& j, Eigen::Index dim) {
  Vector v;
  if (j.is_number()) {
    v = Vector::Constant(1, complex_from_json(j));
  } else if (j.is_array()) {
    v.resize(static_cast<Eigen::Index>(j.size()));
    for (std::size_t i = 0; i < j.size(); ++i) {
      const Json& e = j[i];
      // Column-matrix style [[a],[b]] is accepted too.
      v(static_cast<Eigen::Index>(i)) = (e.is_array() && e.size() == 1) ? complex_from_json(e[0]) : complex_from_json(e);
    }
  } else {
    parse_fail("vector literal expected, got " + j.dump());
  }
  if (dim >= 0 && v.size() != dim) {
    parse_fail("vector: expected length " + std::to_string(dim) + ", got " + std::to_string(v.size()));
  }
  return v;
}

Json vector_to_json(const Vector& v) {
  Json out = Json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) out.push_back(complex_to_json(v(i)));
  return out;
}

namespace {

Matrix literal(const Json& j, bool as_vector, Eigen::Index rows, Eigen::Index cols) {
  if (as_vector) return vector_from_json(j, rows);
  return matrix_from_json(j, rows, cols);
}

MatrixFunction function_from_json(const Json& j, double period, bool as_vector, Eigen::Index rows,
                                  Eigen::Index cols) {
  if (!j.is_object()) return MatrixFunction::constant(period, literal(j, as_vector, rows, cols));
  const auto form = require(j, "form").get<std::string>();
  if (form == "constant") {
    return MatrixFunction::constant(period, literal(require(j, "value"), as_vector, rows, cols));
  }
  if (form == "fourier") {
    std::vector<Harmonic> terms;
    for (const auto& t : require(j, "terms")) {
      Harmonic h;
      h.k = require(t, "k").get<int>();
      h.cos_coeff = t.contains("cos") ? literal(t.at("cos"), as_vector, rows, cols) : Matrix();
      h.sin_coeff = t.contains("sin") ? literal(t.at("sin"), as_vector, rows, cols) : Matrix();
      if (h.cos_coeff.size() == 0 && h.sin_coeff.size() == 0) parse_fail("fourier term needs cos or sin");
      if (h.cos_coeff.size() == 0) h.cos_coeff = Matrix::Zero(h.sin_coeff.rows(), h.sin_coeff.cols());
      terms.push_back(std::move(h));
    }
    try {
      return MatrixFunction::fourier(period, std::move(terms));
    } catch (const Error& e) {
      parse_fail(e.what());
    }
  }
  if (form == "grid") {
    const Json& samples = j.contains("samples") ? j.at("samples") : require(j, "values");
    std::vector<Matrix> values;
    for (const auto& s : samples) values.push_back(literal(s, as_vector, rows, cols));
    try {
      return MatrixFunction::grid(period, std::move(values));
    } catch (const Error& e) {
      parse_fail(e.what());
    }
  }
  parse_fail("unknown provider form '" + form + "'");
}

}  // namespace

MatrixFunction matrix_function_from_json(const Json& j, double period, Eigen::Index rows, Eigen::Index cols) {
  return function_from_json(j, period, false, rows, cols);
}

MatrixFunction vector_function_from_json(const Json& j, double period, Eigen::Index dim) {
  return function_from_json(j, period, true, dim, 1);
}

Json matrix_function_to_json(const MatrixFunction& f, bool as_vector) {
  auto lit = [&](const Matrix& m) -> Json {
    if (as_vector) return vector_to_json(Eigen::Map<const Vector>(m.data(), m.rows()));
    return matrix_to_json(m);
  };
  switch (f.form()) {
    case MatrixFunction::Form::Constant:
      return Json{{"form", "constant"}, {"value", lit(f.constant_part())}};
    case MatrixFunction::Form::Fourier: {
      Json terms = Json::array();
      if (f.constant_part().size() && !f.constant_part().isZero(0.0)) {
        terms.push_back(Json{{"k", 0}, {"cos", lit(f.constant_part())}});
      }
      for (const auto& h : f.harmonics()) {
        terms.push_back(Json{{"k", h.k}, {"cos", lit(h.cos_coeff)}, {"sin", lit(h.sin_coeff)}});
      }
      return Json{{"form", "fourier"}, {"terms", terms}};
    }
    case MatrixFunction::Form::Grid: {
      if (f.grids().size() == 1 && f.constant_part().isZero(0.0)) {
        Json samples = Json::array();
        for (const auto& s : f.grids().front()) samples.push_back(lit(s));
        return Json{{"form", "grid"}, {"samples", samples}};
      }
      break;
    }
    case MatrixFunction::Form::Mixed:
      break;
  }
  throw Error(ErrorCode::Parse, "mixed-form providers have no file representation");
}

Scenario scenario_from_json(const Json& j) {
  try {
    Scenario sc;
    const Json& sys = require(j, "system");
    sc.system.period = require(sys, "T").get<double>();
    sc.system.n = require(sys, "n").get<Eigen::Index>();
    sc.system.r = require(sys, "r").get<Eigen::Index>();
    const double T = sc.system.period;
    sc.system.A = matrix_function_from_json(require(sys, "A"), T, -1, -1);
    sc.system.B = matrix_function_from_json(require(sys, "B"), T, -1, -1);

    if (j.contains("observations")) {
      const Json& obs = j.at("observations");
      if (obs.contains("points")) {
        for (const auto& p : obs.at("points")) {
          PointObservation po;
          po.t = require(p, "t").get<double>();
          po.H = matrix_from_json(require(p, "H"), -1, -1);
          po.D = matrix_from_json(require(p, "D"), -1, -1);
          sc.scheme.points.push_back(std::move(po));
        }
      }
      if (obs.contains("intervals")) {
        for (const auto& iv : obs.at("intervals")) {
          IntervalObservation io;
          io.a = require(iv, "a").get<double>();
          io.b = require(iv, "b").get<double>();
          io.H = matrix_function_from_json(require(iv, "H"), T, -1, -1);
          io.D = matrix_function_from_json(require(iv, "D"), T, -1, -1);
          sc.scheme.intervals.push_back(std::move(io));
        }
      }
    }

    const Json& unc = require(j, "uncertainty");
    sc.uncertainty.Q = matrix_function_from_json(require(unc, "Q"), T, -1, -1);
    sc.uncertainty.f0 = unc.contains("f0") ? vector_function_from_json(unc.at("f0"), T, -1)
                                           : MatrixFunction::zero(T, sc.system.r, 1);
    sc.functional.l0 = vector_function_from_json(require(require(j, "functional"), "l0"), T, -1);

    if (j.contains("solver")) {
      const Json& s = j.at("solver");
      if (s.contains("base_steps")) sc.solver.base_steps = s.at("base_steps").get<std::size_t>();
      if (s.contains("singularity_tol")) sc.solver.singularity_tol = s.at("singularity_tol").get<double>();
    }
    return sc;
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Parse, e.what());
  }
}

Json scenario_to_json(const Scenario& sc) {
  Json points = Json::array();
  for (const auto& p : sc.scheme.points) {
    points.push_back(Json{{"t", p.t}, {"H", matrix_to_json(p.H)}, {"D", matrix_to_json(p.D)}});
  }
  Json intervals = Json::array();
  for (const auto& iv : sc.scheme.intervals) {
    intervals.push_back(Json{{"a", iv.a},
                             {"b", iv.b},
                             {"H", matrix_function_to_json(iv.H)},
                             {"D", matrix_function_to_json(iv.D)}});
  }
  return Json{
      {"system",
       {{"T", sc.system.period},
        {"n", sc.system.n},
        {"r", sc.system.r},
        {"A", matrix_function_to_json(sc.system.A)},
        {"B", matrix_function_to_json(sc.system.B)}}},
      {"observations", {{"points", points}, {"intervals", intervals}}},
      {"uncertainty",
       {{"Q", matrix_function_to_json(sc.uncertainty.Q)}, {"f0", matrix_function_to_json(sc.uncertainty.f0, true)}}},
      {"functional", {{"l0", matrix_function_to_json(sc.functional.l0, true)}}},
      {"solver", {{"base_steps", sc.solver.base_steps}, {"singularity_tol", sc.solver.singularity_tol}}},
  };
}

Json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw Error(ErrorCode::Io, "cannot open " + path.string());
  try {
    return Json::parse(in);
  } catch (const Json::exception& e) {
    throw Error(ErrorCode::Parse, path.string() + ": " + e.what());
  }
}

Scenario load_scenario(const std::filesystem::path& path) { return scenario_from_json(read_json_file(path)); }

}  // namespace pmx
