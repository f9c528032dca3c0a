#pragma once

// The LP relaxation of dynamic facility location:
//
//   min  sum_{i,t} f_i^t y_i^t + sum_{i,j,t} d_t(i,j) x_ij^t + g sum_{i,j,t<T} z_ij^t
//   s.t. sum_i x_ij^t = 1            for all j, t
//        x_ij^t <= y_i^t             for all i, j, t
//        z_ij^t >= x_ij^t - x_ij^{t+1}  for all i, j, t < T
//        x, y, z >= 0
//
// Note there is no y <= 1 bound; later stages rely on that freedom.

#include <string>
#include <vector>

#include "dynfl/instance.hpp"
#include "dynfl/simplex.hpp"

namespace dynfl {

/// The relaxation plus its variable index map.
struct Relaxation {
  LinearProgram lp;
  int T = 0, nf = 0, nc = 0;
  std::vector<std::string> facility_ids;
  std::vector<std::string> client_ids;

  int y_col(int i, int t) const { return i * T + t; }
  int x_col(int i, int j, int t) const { return nf * T + (t * nf + i) * nc + j; }
  int z_col(int i, int j, int t) const { return nf * T + nf * nc * T + (t * nf + i) * nc + j; }
  int num_vars() const { return nf * T + nf * nc * T + nf * nc * (T - 1); }
};

struct LpComponents {
  double opening = 0.0;
  double connection = 0.0;
  double switching = 0.0;
  double total() const { return opening + connection + switching; }
};

struct FractionalSolution {
  int T = 0, nf = 0, nc = 0;
  std::vector<std::string> facility_ids;  // may be empty (unnamed)
  std::vector<std::string> client_ids;

  std::vector<double> x;  // [t][i][j]
  std::vector<double> y;  // [t][i]
  std::vector<double> z;  // [t][i][j], t in [0, T-1)

  double objective = 0.0;
  double opening = 0.0, connection = 0.0, switching = 0.0;

  double xv(int t, int i, int j) const { return x[(static_cast<std::size_t>(t) * nf + i) * nc + j]; }
  double& xv(int t, int i, int j) { return x[(static_cast<std::size_t>(t) * nf + i) * nc + j]; }
  double yv(int t, int i) const { return y[static_cast<std::size_t>(t) * nf + i]; }
  double& yv(int t, int i) { return y[static_cast<std::size_t>(t) * nf + i]; }
  double zv(int t, int i, int j) const { return z[(static_cast<std::size_t>(t) * nf + i) * nc + j]; }
  double& zv(int t, int i, int j) { return z[(static_cast<std::size_t>(t) * nf + i) * nc + j]; }

  static FractionalSolution zeros(int T, int nf, int nc);
};

/// Default tolerance for feasibility checks on fractional solutions.
inline constexpr double kFeasTol = 1e-7;

Relaxation build_relaxation(const Instance& inst);

/// Solve the relaxation to an optimal vertex. Residuals and reduced costs are
/// verified against tol before returning.
FractionalSolution solve(const Relaxation& rel, double tol = 1e-9);

/// Recompute the three objective sums from a solution and instance.
LpComponents lp_cost_breakdown(const FractionalSolution& sol, const Instance& inst);

/// True iff (x,y,z) is feasible within eps; when `why` is non-null the first
/// violated constraint is described there.
bool check_feasible(const FractionalSolution& sol, double eps = kFeasTol, std::string* why = nullptr);

FractionalSolution read_fractional(const std::string& path);
void write_fractional(const FractionalSolution& sol, const std::string& path);

}  // namespace dynfl
