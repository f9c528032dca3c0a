#pragma once

// Two preprocessing passes applied to an optimal fractional solution before
// rounding:
//
//  1. stabilize(): per client, partition [0,T) into intervals on which the
//     client's connection row is made constant, double y, and rescale z so
//     the total switching budget doubles. After this pass, the number of
//     per-step row changes is covered by the z mass.
//
//  2. duplicate_facilities(): split each facility into copies ("slabs")
//     along the sorted distinct values of its connection/opening variables,
//     so that every connection variable is either 0 or exactly the copy's
//     opening fraction, and every copy is opened by the same fraction at
//     every step where it is active.
//
// Membership (which copies serve which client when) is stored as explicit
// index sets, so row equality across time steps is exact set equality.

#include <vector>

#include "dynfl/instance.hpp"
#include "dynfl/lp.hpp"

namespace dynfl {

/// Values closer than this are merged into one duplication threshold; copies
/// thinner than this cannot arise afterwards.
inline constexpr double kSnapTol = 1e-9;

struct PreprocessedSolution {
  int T = 0;
  int n_originals = 0;
  int n_clients = 0;
  std::vector<std::string> facility_ids;  // originals
  std::vector<std::string> client_ids;

  std::vector<int> copy_original;      // back map: copy -> original facility
  std::vector<double> copy_fraction;   // o_i, in (0,1] for copies reachable by clients
  std::vector<std::vector<int>> copies_of;  // original -> copies, ascending threshold

  // active[t][copy] != 0  <=>  y_copy^t = o_copy (else 0)
  std::vector<std::vector<char>> active;
  // connections[t][j] = sorted copy ids serving client j at t (x = o on them)
  std::vector<std::vector<std::vector<int>>> connections;

  double z_total = 0.0;  // carried switching mass, sum of z entries

  int num_copies() const { return static_cast<int>(copy_original.size()); }

  double yv(int t, int copy) const { return active[t][copy] ? copy_fraction[copy] : 0.0; }

  /// Copies with at least one client connection at t, sorted.
  std::vector<int> support_copies(int t) const;

  /// Aggregate the copies back to original-facility (x, y) tables.
  void aggregate(std::vector<double>& x_out, std::vector<double>& y_out) const;
};

/// Boundary time steps for one client: 0-based, starts with 0, ends with T.
/// Within each window [b_k, b_{k+1}) the greedy rule keeps
/// sum_i min_u x[i][u] >= 1/2, taking each window as large as possible.
std::vector<int> compute_boundaries(const FractionalSolution& frac, int client);

/// First pass (factor-2 interval stabilization). Structural: cost components
/// of the result are not filled in; recompute them with lp_cost_breakdown.
FractionalSolution stabilize(const FractionalSolution& frac);

/// Second pass (facility duplication). Total cost is unchanged by
/// construction; the result carries z_total from the input.
PreprocessedSolution duplicate_facilities(const FractionalSolution& frac);

/// Clients whose connection row changes between t and t+1 (Z^t).
std::vector<int> change_set(const FractionalSolution& frac, int t, double eps = kFeasTol);
std::vector<int> change_set(const PreprocessedSolution& prep, int t);

/// Restrict to time steps [first, last): copies are kept (and stay shared
/// with the source), active/connection data is sliced, z_total is zeroed.
PreprocessedSolution slice_time(const PreprocessedSolution& prep, int first, int last);

PreprocessedSolution read_preprocessed(const std::string& path);
void write_preprocessed(const PreprocessedSolution& prep, const std::string& path);

}  // namespace dynfl
