#pragma once

#include <stdexcept>
#include <string>

namespace dynfl {

/// Malformed or structurally invalid input file.
struct ParseError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Inputs that are well-formed but violate a precondition (dimension
/// mismatch, infeasible solution, dangling id, budget exceeded, ...).
struct DataError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

/// Internal solver failure. The relaxations built here are feasible and
/// bounded by construction, so hitting this signals a bug, not bad input.
struct SolverError : std::runtime_error {
  using std::runtime_error::runtime_error;
};

}  // namespace dynfl
