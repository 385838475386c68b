#pragma once

// Problem files for the batch front end. JSON; complex entries are [re, im]
// pairs, matrices are row-major nested arrays. Validation errors carry a
// JSON-pointer path to the offending value.

#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "dilab/hereditary.hpp"
#include "dilab/linalg.hpp"

namespace dilab {

struct Truncation {
  std::optional<int> degree;  // absent means "auto"
  double epsilon = 1e-9;
};

/// Subspace of a truncated box, given by a spanning set (frame) or by
/// monomials.
struct SubspaceSpec {
  Weights weights;
  int degree = 0;
  Index coeff_dim = 1;
  ComplexMatrix spanning;  // total_dim x k
};

struct ProblemFile {
  std::string version = "1";
  std::optional<std::string> command;
  std::vector<ComplexMatrix> tuple;
  std::optional<Weights> weights;
  std::optional<std::vector<std::vector<double>>> kernel_coeffs;
  std::optional<std::string> certificate;
  Truncation truncation;
  Tolerances tolerances;
  std::optional<SubspaceSpec> subspace;
};

/// Throws Error(Schema) with a path-qualified message.
ProblemFile parse_problem(const nlohmann::json& doc);
ProblemFile load_problem(const std::string& path);

nlohmann::json complex_to_json(Complex z);
nlohmann::json matrix_to_json(const ComplexMatrix& a);

}  // namespace dilab
