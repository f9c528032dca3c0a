#include "dynfl/simplex.hpp"

#include <algorithm>
#include <cmath>
#include <limits>

#include "dynfl/errors.hpp"

namespace dynfl {

namespace {

constexpr int kRefactorEvery = 128;

// Standard-form problem: min c.v, A v = b with b >= 0, v >= 0. Columns are
// stored sparse; slacks/surplus come first after the structural variables,
// artificials last so Bland's index order prefers real variables.
struct Standard {
  int m = 0;
  int n = 0;          // total columns
  int art_begin = 0;  // first artificial column
  std::vector<std::vector<std::pair<int, double>>> cols;
  std::vector<double> b;
  std::vector<double> cost;        // phase-2 objective (0 on non-structural)
  std::vector<int> initial_basis;  // per row
};

Standard to_standard(const LinearProgram& lp) {
  Standard s;
  s.m = static_cast<int>(lp.rows.size());
  s.cols.resize(lp.num_vars);
  s.cost.assign(lp.num_vars, 0.0);
  for (int j = 0; j < lp.num_vars; ++j) s.cost[j] = lp.objective[j];
  s.b.resize(s.m);
  s.initial_basis.assign(s.m, -1);

  std::vector<double> sign(s.m, 1.0);
  std::vector<RowSense> sense(s.m);
  for (int r = 0; r < s.m; ++r) {
    const auto& row = lp.rows[r];
    sense[r] = row.sense;
    double rhs = row.rhs;
    if (rhs < 0.0) {
      sign[r] = -1.0;
      rhs = -rhs;
      if (row.sense == RowSense::Le)
        sense[r] = RowSense::Ge;
      else if (row.sense == RowSense::Ge)
        sense[r] = RowSense::Le;
    }
    s.b[r] = rhs;
    for (auto [col, coeff] : row.coeffs) s.cols[col].push_back({r, sign[r] * coeff});
  }

  s.n = lp.num_vars;
  // Slack (<=) and surplus (>=) columns.
  for (int r = 0; r < s.m; ++r) {
    if (sense[r] == RowSense::Le) {
      s.cols.push_back({{r, 1.0}});
      s.cost.push_back(0.0);
      s.initial_basis[r] = s.n++;
    } else if (sense[r] == RowSense::Ge) {
      s.cols.push_back({{r, -1.0}});
      s.cost.push_back(0.0);
      ++s.n;
    }
  }
  // Artificials for rows without a slack basis.
  s.art_begin = s.n;
  for (int r = 0; r < s.m; ++r) {
    if (s.initial_basis[r] < 0) {
      s.cols.push_back({{r, 1.0}});
      s.cost.push_back(0.0);
      s.initial_basis[r] = s.n++;
    }
  }
  return s;
}

struct Tableau {
  const Standard& s;
  std::vector<int> basis;          // per row -> column
  std::vector<char> in_basis;      // per column
  std::vector<double> binv;        // m x m, row-major
  std::vector<double> beta;        // current basic values, = Binv b
  long iterations = 0;

  explicit Tableau(const Standard& std_form) : s(std_form) {
    basis = s.initial_basis;
    in_basis.assign(s.n, 0);
    for (int c : basis) in_basis[c] = 1;
    refactor();
  }

  int m() const { return s.m; }

  // Rebuild Binv from the basis columns by Gauss-Jordan with partial
  // pivoting, then recompute beta.
  void refactor() {
    int mm = m();
    std::vector<double> mat(static_cast<std::size_t>(mm) * 2 * mm, 0.0);
    auto at = [&](int r, int c) -> double& { return mat[static_cast<std::size_t>(r) * 2 * mm + c]; };
    for (int r = 0; r < mm; ++r) at(r, mm + r) = 1.0;
    for (int k = 0; k < mm; ++k)
      for (auto [r, v] : s.cols[basis[k]]) at(r, k) = v;

    for (int col = 0; col < mm; ++col) {
      int piv = col;
      double best = std::abs(at(col, col));
      for (int r = col + 1; r < mm; ++r) {
        double a = std::abs(at(r, col));
        if (a > best) {
          best = a;
          piv = r;
        }
      }
      if (best < 1e-12) throw SolverError("simplex: singular basis during refactorization");
      if (piv != col)
        for (int c = 0; c < 2 * mm; ++c) std::swap(at(piv, c), at(col, c));
      double d = at(col, col);
      for (int c = 0; c < 2 * mm; ++c) at(col, c) /= d;
      for (int r = 0; r < mm; ++r) {
        if (r == col) continue;
        double f = at(r, col);
        if (f == 0.0) continue;
        for (int c = 0; c < 2 * mm; ++c) at(r, c) -= f * at(col, c);
      }
    }
    binv.assign(static_cast<std::size_t>(mm) * mm, 0.0);
    for (int r = 0; r < mm; ++r)
      for (int c = 0; c < mm; ++c) binv[static_cast<std::size_t>(r) * mm + c] = at(r, mm + c);
    recompute_beta();
  }

  void recompute_beta() {
    int mm = m();
    beta.assign(mm, 0.0);
    for (int r = 0; r < mm; ++r) {
      double acc = 0.0;
      const double* row = &binv[static_cast<std::size_t>(r) * mm];
      for (int c = 0; c < mm; ++c) acc += row[c] * s.b[c];
      beta[r] = acc;
    }
  }

  std::vector<double> multipliers(const std::vector<double>& obj) const {
    int mm = m();
    std::vector<double> pi(mm, 0.0);
    for (int r = 0; r < mm; ++r) {
      double cb = obj[basis[r]];
      if (cb == 0.0) continue;
      const double* row = &binv[static_cast<std::size_t>(r) * mm];
      for (int c = 0; c < mm; ++c) pi[c] += cb * row[c];
    }
    return pi;
  }

  double reduced_cost(const std::vector<double>& obj, const std::vector<double>& pi, int j) const {
    double d = obj[j];
    for (auto [r, v] : s.cols[j]) d -= pi[r] * v;
    return d;
  }

  void column_update(int j, std::vector<double>& w) const {
    int mm = m();
    std::fill(w.begin(), w.end(), 0.0);
    for (auto [r, v] : s.cols[j]) {
      for (int i = 0; i < mm; ++i) w[i] += binv[static_cast<std::size_t>(i) * mm + r] * v;
    }
  }

  // One phase of primal simplex with Bland's rule. `obj` is the phase
  // objective; columns >= forbid_from may not enter.
  void run_phase(const std::vector<double>& obj, int forbid_from, double tol, long max_iters) {
    int mm = m();
    std::vector<double> w(mm);
    int since_refactor = 0;
    for (;;) {
      if (++iterations > max_iters)
        throw SolverError("simplex: iteration limit exceeded (" + std::to_string(max_iters) + ")");

      std::vector<double> pi = multipliers(obj);
      int entering = -1;
      for (int j = 0; j < forbid_from; ++j) {
        if (in_basis[j]) continue;
        if (reduced_cost(obj, pi, j) < -tol) {
          entering = j;  // Bland: first (smallest) eligible index
          break;
        }
      }
      if (entering < 0) return;

      column_update(entering, w);

      // Ratio test. Rows holding a basic artificial may also pivot at a
      // zero step when w < 0, so artificials can never become positive.
      double theta = std::numeric_limits<double>::infinity();
      int leave = -1;
      for (int r = 0; r < mm; ++r) {
        double step = -1.0;
        if (w[r] > tol)
          step = std::max(beta[r], 0.0) / w[r];
        else if (basis[r] >= s.art_begin && w[r] < -tol)
          step = 0.0;
        if (step < 0.0) continue;
        if (step < theta - 1e-15 || (step <= theta + 1e-15 && (leave < 0 || basis[r] < basis[leave]))) {
          theta = std::min(step, theta);
          leave = r;
        }
      }
      if (leave < 0) throw SolverError("simplex: unbounded direction encountered");

      // Pivot: update beta, Binv, basis bookkeeping.
      double piv = w[leave];
      for (int r = 0; r < mm; ++r) {
        if (r == leave) continue;
        beta[r] -= theta * w[r];
      }
      beta[leave] = theta;
      double* lrow = &binv[static_cast<std::size_t>(leave) * mm];
      for (int c = 0; c < mm; ++c) lrow[c] /= piv;
      for (int r = 0; r < mm; ++r) {
        if (r == leave) continue;
        double f = w[r];
        if (f == 0.0) continue;
        double* row = &binv[static_cast<std::size_t>(r) * mm];
        for (int c = 0; c < mm; ++c) row[c] -= f * lrow[c];
      }
      in_basis[basis[leave]] = 0;
      in_basis[entering] = 1;
      basis[leave] = entering;

      if (++since_refactor >= kRefactorEvery) {
        refactor();
        since_refactor = 0;
      }
    }
  }
};

}  // namespace

SimplexResult solve_simplex(const LinearProgram& lp, double tol, long max_iters) {
  if (lp.num_vars <= 0) throw DataError("simplex: no variables");
  Standard s = to_standard(lp);
  if (max_iters < 0) max_iters = 400L * (s.m + s.n) + 20'000;

  Tableau tab(s);

  // Phase 1: drive artificials to zero.
  bool any_artificial = s.art_begin < s.n;
  if (any_artificial) {
    std::vector<double> phase1(s.n, 0.0);
    for (int j = s.art_begin; j < s.n; ++j) phase1[j] = 1.0;
    tab.run_phase(phase1, s.n, tol, max_iters);
    tab.refactor();
    double infeas = 0.0;
    for (int r = 0; r < s.m; ++r)
      if (tab.basis[r] >= s.art_begin) infeas += std::max(tab.beta[r], 0.0);
    if (infeas > 1e-7) throw SolverError("simplex: problem reported infeasible");

    // Pivot basic artificials out where the row admits a real column;
    // rows that do not are redundant and their artificial stays at zero
    // (guarded by the ratio test above).
    std::vector<double> w(s.m);
    for (int r = 0; r < s.m; ++r) {
      if (tab.basis[r] < s.art_begin) continue;
      for (int j = 0; j < s.art_begin; ++j) {
        if (tab.in_basis[j]) continue;
        tab.column_update(j, w);
        if (std::abs(w[r]) > 1e-7) {
          tab.in_basis[tab.basis[r]] = 0;
          tab.in_basis[j] = 1;
          tab.basis[r] = j;
          tab.refactor();
          break;
        }
      }
    }
  }

  // Phase 2 on the real objective; artificials may not enter.
  tab.run_phase(s.cost, s.art_begin, tol, max_iters);
  tab.refactor();

  SimplexResult res;
  res.iterations = tab.iterations;
  res.solution.assign(lp.num_vars, 0.0);
  for (int r = 0; r < s.m; ++r) {
    if (tab.basis[r] < lp.num_vars) res.solution[tab.basis[r]] = tab.beta[r];
    if (tab.basis[r] >= s.art_begin && tab.beta[r] > 1e-7)
      throw SolverError("simplex: artificial variable positive at termination");
  }
  // Snap the tiny negatives a refactorization can leave on degenerate rows.
  for (double& v : res.solution)
    if (v < 0.0 && v > -1e-9) v = 0.0;

  res.objective = 0.0;
  for (int j = 0; j < lp.num_vars; ++j) res.objective += lp.objective[j] * res.solution[j];

  // Residuals against the original rows.
  res.max_primal_residual = 0.0;
  for (const auto& row : lp.rows) {
    double lhs = 0.0;
    for (auto [col, coeff] : row.coeffs) lhs += coeff * res.solution[col];
    double viol = 0.0;
    switch (row.sense) {
      case RowSense::Eq: viol = std::abs(lhs - row.rhs); break;
      case RowSense::Le: viol = std::max(0.0, lhs - row.rhs); break;
      case RowSense::Ge: viol = std::max(0.0, row.rhs - lhs); break;
    }
    res.max_primal_residual = std::max(res.max_primal_residual, viol);
  }

  // Optimality certificate: nonnegative reduced costs over real columns.
  std::vector<double> pi = tab.multipliers(s.cost);
  res.min_reduced_cost = 0.0;
  for (int j = 0; j < s.art_begin; ++j) {
    if (tab.in_basis[j]) continue;
    res.min_reduced_cost = std::min(res.min_reduced_cost, tab.reduced_cost(s.cost, pi, j));
  }
  return res;
}

}  // namespace dynfl
