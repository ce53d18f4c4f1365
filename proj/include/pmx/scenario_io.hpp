#pragma once

#include "pmx/scenario.hpp"

#include <json.hpp>

#include <filesystem>

namespace pmx {

using Json = nlohmann::json;

// Complex entries are [re, im]; a bare number reads as [x, 0].
Complex complex_from_json(const Json& j);
Json complex_to_json(Complex z);

Matrix matrix_from_json(const Json& j, Eigen::Index rows, Eigen::Index cols);
Json matrix_to_json(const Matrix& m);
Vector vector_from_json(const Json& j, Eigen::Index dim);
Json vector_to_json(const Vector& v);

/// {"form": "constant"|"fourier"|"grid", ...}; a bare matrix literal is
/// read as a constant provider.
MatrixFunction matrix_function_from_json(const Json& j, double period, Eigen::Index rows, Eigen::Index cols);
/// Same as above for column-vector providers; values are flat entry lists.
MatrixFunction vector_function_from_json(const Json& j, double period, Eigen::Index dim);
Json matrix_function_to_json(const MatrixFunction& f, bool as_vector = false);

Scenario scenario_from_json(const Json& j);
Json scenario_to_json(const Scenario& sc);

Json read_json_file(const std::filesystem::path& path);
Scenario load_scenario(const std::filesystem::path& path);

}  // namespace pmx
