#pragma once

// Exact brute-force solvers for tiny instances. Enumerates every tuple of
// nonempty per-step open sets; given open sets, the optimal assignment of a
// client over time is a shortest-path recurrence, which is exact because the
// objective separates across clients once the open sets are fixed.

#include <cstdint>
#include <utility>
#include <vector>

#include "dynfl/instance.hpp"

namespace dynfl {

struct ExactSolution {
  double cost = 0.0;
  std::vector<std::vector<int>> open;        // per t, sorted facility indices
  std::vector<std::vector<int>> assignment;  // per client, facility sequence over t
  long long tuples_examined = 0;
};

/// Globally optimal solution by exhaustive enumeration. Throws DataError when
/// (2^|F|)^T exceeds `limit`. Ties between optimal tuples are broken
/// lexicographically (first in enumeration order wins).
ExactSolution brute_force(const Instance& inst, long long limit = 1'000'000);

/// Optimal facility sequence for one client given the open sets: minimizes
/// sum_t d_t(phi_t, j) + g * #switches. Throws DataError on an empty set.
std::pair<std::vector<int>, double> per_client_dp(const std::vector<std::vector<int>>& open_sets,
                                                  int client, const Instance& inst);

/// Independent micro-oracle for T = 1 (classic facility location): enumerate
/// subsets, connect each client to its nearest open facility.
ExactSolution brute_force_classic(const Instance& inst);

ExactSolution read_exact(const std::string& path);
void write_exact(const ExactSolution& sol, const std::string& path);

}  // namespace dynfl
