#include "dynfl/lp.hpp"

#include <algorithm>
#include <cmath>
#include <fstream>
#include <limits>
#include <sstream>

#include "dynfl/errors.hpp"
#include "json.hpp"

namespace dynfl {

FractionalSolution FractionalSolution::zeros(int T, int nf, int nc) {
  FractionalSolution s;
  s.T = T;
  s.nf = nf;
  s.nc = nc;
  s.x.assign(static_cast<std::size_t>(T) * nf * nc, 0.0);
  s.y.assign(static_cast<std::size_t>(T) * nf, 0.0);
  s.z.assign(static_cast<std::size_t>(std::max(0, T - 1)) * nf * nc, 0.0);
  return s;
}

Relaxation build_relaxation(const Instance& inst) {
  Relaxation rel;
  rel.T = inst.T;
  rel.nf = inst.num_facilities();
  rel.nc = inst.num_clients();
  rel.facility_ids = inst.facility_ids;
  rel.client_ids = inst.client_ids;

  LinearProgram& lp = rel.lp;
  lp.num_vars = rel.num_vars();
  lp.objective.assign(lp.num_vars, 0.0);
  for (int i = 0; i < rel.nf; ++i)
    for (int t = 0; t < rel.T; ++t) lp.objective[rel.y_col(i, t)] = inst.open_cost(i, t);
  for (int t = 0; t < rel.T; ++t)
    for (int i = 0; i < rel.nf; ++i)
      for (int j = 0; j < rel.nc; ++j) lp.objective[rel.x_col(i, j, t)] = inst.dist(t, i, j);
  for (int t = 0; t + 1 < rel.T; ++t)
    for (int i = 0; i < rel.nf; ++i)
      for (int j = 0; j < rel.nc; ++j) lp.objective[rel.z_col(i, j, t)] = inst.g;

  // sum_i x_ij^t = 1
  for (int t = 0; t < rel.T; ++t)
    for (int j = 0; j < rel.nc; ++j) {
      std::vector<std::pair<int, double>> coeffs;
      coeffs.reserve(rel.nf);
      for (int i = 0; i < rel.nf; ++i) coeffs.push_back({rel.x_col(i, j, t), 1.0});
      lp.add_row(std::move(coeffs), RowSense::Eq, 1.0);
    }
  // x_ij^t <= y_i^t
  for (int t = 0; t < rel.T; ++t)
    for (int i = 0; i < rel.nf; ++i)
      for (int j = 0; j < rel.nc; ++j)
        lp.add_row({{rel.x_col(i, j, t), 1.0}, {rel.y_col(i, t), -1.0}}, RowSense::Le, 0.0);
  // z_ij^t >= x_ij^t - x_ij^{t+1}
  for (int t = 0; t + 1 < rel.T; ++t)
    for (int i = 0; i < rel.nf; ++i)
      for (int j = 0; j < rel.nc; ++j)
        lp.add_row({{rel.x_col(i, j, t), 1.0},
                    {rel.x_col(i, j, t + 1), -1.0},
                    {rel.z_col(i, j, t), -1.0}},
                   RowSense::Le, 0.0);
  return rel;
}

FractionalSolution solve(const Relaxation& rel, double tol) {
  SimplexResult res = solve_simplex(rel.lp, tol);
  if (res.max_primal_residual > tol)
    throw SolverError("lp: primal residual " + std::to_string(res.max_primal_residual) +
                      " exceeds tolerance");
  if (res.min_reduced_cost < -tol)
    throw SolverError("lp: negative reduced cost at termination");

  FractionalSolution sol = FractionalSolution::zeros(rel.T, rel.nf, rel.nc);
  sol.facility_ids = rel.facility_ids;
  sol.client_ids = rel.client_ids;
  for (int t = 0; t < rel.T; ++t)
    for (int i = 0; i < rel.nf; ++i) {
      sol.yv(t, i) = res.solution[rel.y_col(i, t)];
      for (int j = 0; j < rel.nc; ++j) sol.xv(t, i, j) = res.solution[rel.x_col(i, j, t)];
    }
  for (int t = 0; t + 1 < rel.T; ++t)
    for (int i = 0; i < rel.nf; ++i)
      for (int j = 0; j < rel.nc; ++j) sol.zv(t, i, j) = res.solution[rel.z_col(i, j, t)];

  // The three objective sums, read off the cost vector blocks.
  sol.opening = sol.connection = sol.switching = 0.0;
  for (int t = 0; t < rel.T; ++t)
    for (int i = 0; i < rel.nf; ++i)
      sol.opening += rel.lp.objective[rel.y_col(i, t)] * sol.yv(t, i);
  for (int t = 0; t < rel.T; ++t)
    for (int i = 0; i < rel.nf; ++i)
      for (int j = 0; j < rel.nc; ++j)
        sol.connection += rel.lp.objective[rel.x_col(i, j, t)] * sol.xv(t, i, j);
  for (int t = 0; t + 1 < rel.T; ++t)
    for (int i = 0; i < rel.nf; ++i)
      for (int j = 0; j < rel.nc; ++j)
        sol.switching += rel.lp.objective[rel.z_col(i, j, t)] * sol.zv(t, i, j);
  sol.objective = sol.opening + sol.connection + sol.switching;
  return sol;
}

LpComponents lp_cost_breakdown(const FractionalSolution& sol, const Instance& inst) {
  if (sol.T != inst.T || sol.nf != inst.num_facilities() || sol.nc != inst.num_clients())
    throw DataError("lp_cost_breakdown: solution/instance dimensions do not match");
  LpComponents c;
  for (int t = 0; t < sol.T; ++t)
    for (int i = 0; i < sol.nf; ++i) c.opening += inst.open_cost(i, t) * sol.yv(t, i);
  for (int t = 0; t < sol.T; ++t)
    for (int i = 0; i < sol.nf; ++i)
      for (int j = 0; j < sol.nc; ++j) c.connection += inst.dist(t, i, j) * sol.xv(t, i, j);
  for (int t = 0; t + 1 < sol.T; ++t)
    for (int i = 0; i < sol.nf; ++i)
      for (int j = 0; j < sol.nc; ++j) c.switching += inst.g * sol.zv(t, i, j);
  return c;
}

bool check_feasible(const FractionalSolution& sol, double eps, std::string* why) {
  auto fail = [&](const std::string& msg) {
    if (why) *why = msg;
    return false;
  };
  for (int t = 0; t < sol.T; ++t)
    for (int j = 0; j < sol.nc; ++j) {
      double sum = 0.0;
      for (int i = 0; i < sol.nf; ++i) {
        double xv = sol.xv(t, i, j);
        if (xv < -eps) return fail("x negative");
        if (xv > sol.yv(t, i) + eps) return fail("x exceeds y");
        sum += xv;
      }
      if (std::abs(sum - 1.0) > eps) return fail("client row does not sum to 1");
    }
  for (int t = 0; t < sol.T; ++t)
    for (int i = 0; i < sol.nf; ++i)
      if (sol.yv(t, i) < -eps) return fail("y negative");
  for (int t = 0; t + 1 < sol.T; ++t)
    for (int i = 0; i < sol.nf; ++i)
      for (int j = 0; j < sol.nc; ++j) {
        double zv = sol.zv(t, i, j);
        if (zv < -eps) return fail("z negative");
        if (zv < sol.xv(t, i, j) - sol.xv(t + 1, i, j) - eps)
          return fail("z below connection decrease");
      }
  return true;
}

// --- JSON io ---------------------------------------------------------------

using nlohmann::json;

void write_fractional(const FractionalSolution& sol, const std::string& path) {
  json doc;
  if (!sol.facility_ids.empty()) doc["facilities"] = sol.facility_ids;
  if (!sol.client_ids.empty()) doc["clients"] = sol.client_ids;
  json x = json::array(), y = json::array(), z = json::array();
  for (int t = 0; t < sol.T; ++t) {
    json xt = json::array(), yt = json::array();
    for (int i = 0; i < sol.nf; ++i) {
      yt.push_back(sol.yv(t, i));
      json row = json::array();
      for (int j = 0; j < sol.nc; ++j) row.push_back(sol.xv(t, i, j));
      xt.push_back(std::move(row));
    }
    x.push_back(std::move(xt));
    y.push_back(std::move(yt));
  }
  for (int t = 0; t + 1 < sol.T; ++t) {
    json zt = json::array();
    for (int i = 0; i < sol.nf; ++i) {
      json row = json::array();
      for (int j = 0; j < sol.nc; ++j) row.push_back(sol.zv(t, i, j));
      zt.push_back(std::move(row));
    }
    z.push_back(std::move(zt));
  }
  doc["x"] = std::move(x);
  doc["y"] = std::move(y);
  doc["z"] = std::move(z);
  if (std::isfinite(sol.objective)) {
    doc["objective"] = sol.objective;
    doc["opening"] = sol.opening;
    doc["connection"] = sol.connection;
    doc["switching"] = sol.switching;
  }
  std::ofstream out(path);
  if (!out) throw DataError(path + ": cannot open for writing");
  out << doc.dump(2) << "\n";
}

FractionalSolution read_fractional(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ParseError(path + ": cannot open for reading");
  json doc;
  try {
    doc = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ParseError(path + ": " + e.what());
  }
  for (const char* key : {"x", "y", "z"})
    if (!doc.contains(key)) throw ParseError(path + ": missing field '" + std::string(key) + "'");

  const json& x = doc["x"];
  const json& y = doc["y"];
  const json& z = doc["z"];
  if (!x.is_array() || x.empty() || !x[0].is_array() || x[0].empty() || !x[0][0].is_array())
    throw ParseError(path + ": field 'x' must be a [T][F][C] array");
  int T = static_cast<int>(x.size());
  int nf = static_cast<int>(x[0].size());
  int nc = static_cast<int>(x[0][0].size());
  if (static_cast<int>(y.size()) != T) throw ParseError(path + ": field 'y' must have T slices");
  if (static_cast<int>(z.size()) != T - 1)
    throw ParseError(path + ": field 'z' must have T-1 slices");

  FractionalSolution sol = FractionalSolution::zeros(T, nf, nc);
  if (doc.contains("facilities")) sol.facility_ids = doc["facilities"].get<std::vector<std::string>>();
  if (doc.contains("clients")) sol.client_ids = doc["clients"].get<std::vector<std::string>>();
  for (int t = 0; t < T; ++t) {
    if (static_cast<int>(x[t].size()) != nf || static_cast<int>(y[t].size()) != nf)
      throw ParseError(path + ": inconsistent facility dimension in 'x'/'y'");
    for (int i = 0; i < nf; ++i) {
      if (static_cast<int>(x[t][i].size()) != nc)
        throw ParseError(path + ": inconsistent client dimension in 'x'");
      sol.yv(t, i) = y[t][i].get<double>();
      for (int j = 0; j < nc; ++j) sol.xv(t, i, j) = x[t][i][j].get<double>();
    }
  }
  for (int t = 0; t + 1 < T; ++t) {
    if (static_cast<int>(z[t].size()) != nf)
      throw ParseError(path + ": inconsistent facility dimension in 'z'");
    for (int i = 0; i < nf; ++i) {
      if (static_cast<int>(z[t][i].size()) != nc)
        throw ParseError(path + ": inconsistent client dimension in 'z'");
      for (int j = 0; j < nc; ++j) sol.zv(t, i, j) = z[t][i][j].get<double>();
    }
  }
  sol.objective = doc.value("objective", std::numeric_limits<double>::quiet_NaN());
  sol.opening = doc.value("opening", std::numeric_limits<double>::quiet_NaN());
  sol.connection = doc.value("connection", std::numeric_limits<double>::quiet_NaN());
  sol.switching = doc.value("switching", std::numeric_limits<double>::quiet_NaN());
  return sol;
}

}  // namespace dynfl
