#pragma once

// Dense two-phase revised primal simplex with Bland's anti-cycling rule.
// Sized for desk-scale LPs: the basis inverse is kept explicitly and
// refactorized periodically. Deterministic: a fixed pivot order means
// repeated runs return the identical vertex.

#include <cstdint>
#include <utility>
#include <vector>

namespace dynfl {

enum class RowSense : char { Eq = '=', Le = '<', Ge = '>' };

/// min c·v  subject to  rows (coeffs, sense, rhs),  v >= 0.
struct LinearProgram {
  struct Row {
    std::vector<std::pair<int, double>> coeffs;
    RowSense sense = RowSense::Eq;
    double rhs = 0.0;
  };

  int num_vars = 0;
  std::vector<double> objective;
  std::vector<Row> rows;

  int add_var(double cost) {
    objective.push_back(cost);
    return num_vars++;
  }
  void add_row(std::vector<std::pair<int, double>> coeffs, RowSense sense, double rhs) {
    rows.push_back(Row{std::move(coeffs), sense, rhs});
  }
};

struct SimplexResult {
  std::vector<double> solution;
  double objective = 0.0;
  long iterations = 0;
  double max_primal_residual = 0.0;  // against the original rows
  double min_reduced_cost = 0.0;     // >= -tol certifies optimality
};

/// Solves the LP to a basic optimal solution. Throws SolverError on
/// infeasible/unbounded input or when the iteration limit is hit
/// (max_iters < 0 picks a generous default).
SimplexResult solve_simplex(const LinearProgram& lp, double tol = 1e-9, long max_iters = -1);

}  // namespace dynfl
