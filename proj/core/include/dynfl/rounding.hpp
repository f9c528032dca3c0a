#pragma once

// Randomized rounding with competing exponential clocks. One clock per
// facility copy (rate o_i) and one per client (rate 1) are sampled once and
// shared by every time step. Per step, each vertex of the support graph
// points at the smallest clock in its neighborhood; facilities on 2-cycles
// open, and each client connects along its smallest-following path.
//
// Two presentations are implemented: the sequential scan over clients in
// clock order, and the connection-graph construction. They are equivalent
// and the test suite enforces it.

#include <cstdint>
#include <string>
#include <vector>

#include "dynfl/preprocess.hpp"
#include "dynfl/rng.hpp"

namespace dynfl {

struct Clocks {
  std::uint64_t seed = 0;
  std::vector<double> facility;  // per copy, Exp(o_copy)
  std::vector<double> client;    // per client, Exp(1)
};

/// Clock values are distinct with probability 1; on exact float ties the
/// comparison falls back to index order. Facility and client clocks are
/// never compared against each other.
inline bool facility_clock_less(const Clocks& c, int a, int b) {
  if (c.facility[a] != c.facility[b]) return c.facility[a] < c.facility[b];
  return a < b;
}
inline bool client_clock_less(const Clocks& c, int a, int b) {
  if (c.client[a] != c.client[b]) return c.client[a] < c.client[b];
  return a < b;
}

Clocks sample_clocks(const PreprocessedSolution& prep, std::uint64_t seed);
/// In-place variant; reuses the vectors of `out` across trials.
void sample_clocks_into(const PreprocessedSolution& prep, std::uint64_t seed, Clocks& out);

/// Trial-independent part of the per-step graph: the support adjacency.
struct SupportGraph {
  int t = -1;
  int n_clients = 0;
  std::vector<int> copies;                   // F^t, sorted copy ids
  std::vector<int> copy_pos;                 // copy id -> index into copies (-1 absent)
  std::vector<std::vector<int>> clients_of;  // per F^t index
  std::vector<std::vector<int>> fac_of;      // per client, sorted copy ids
};

SupportGraph build_support(const PreprocessedSolution& prep, int t);

/// Support graph plus the unique outgoing arc per vertex.
struct ConnectionGraph {
  SupportGraph support;
  std::vector<int> client_out;  // client -> copy id
  std::vector<int> copy_out;    // F^t index -> client

  /// Checks that every cycle of the out-map has exactly two arcs. Throws
  /// SolverError on violation. Cheap; run on every orientation.
  void verify() const;
};

ConnectionGraph build_connection_graph(const PreprocessedSolution& prep, int t,
                                       const Clocks& clocks);

/// Recomputes the out-arcs of `graph` for new clocks without touching the
/// support part. Allocation-free after the first use.
void orient(const Clocks& clocks, ConnectionGraph& graph);

struct PathVertex {
  bool is_facility = false;
  int id = -1;  // copy id or client id
  bool operator==(const PathVertex&) const = default;
};

/// Reusable scratch space for path walks (epoch-stamped visited marks).
struct PathWorkspace {
  std::vector<std::uint32_t> client_mark, copy_mark;
  std::uint32_t epoch = 0;
};

/// The smallest-following walk from client j, stopped just before revisiting
/// a vertex. Always starts at j and ends adjacent to a 2-cycle.
std::vector<PathVertex> connection_path(int j, const ConnectionGraph& graph);
void connection_path_into(int j, const ConnectionGraph& graph, PathWorkspace& ws,
                          std::vector<PathVertex>& out);

struct TimestepRounding {
  std::vector<int> open_copies;  // sorted
  std::vector<int> assignment;   // per client -> copy id
};

TimestepRounding round_timestep_graph(const PreprocessedSolution& prep, int t,
                                      const Clocks& clocks);
TimestepRounding round_timestep_sequential(const PreprocessedSolution& prep, int t,
                                           const Clocks& clocks);

struct RoundedSolution {
  int T = 0;
  std::vector<std::string> facility_ids;
  std::vector<std::string> client_ids;
  std::vector<std::vector<int>> open_facilities;  // per t, sorted original indices
  std::vector<std::vector<int>> assignment;       // per t, per client -> original
  // Copy-level detail, kept for verification.
  std::vector<std::vector<int>> open_copies;
  std::vector<std::vector<int>> copy_assignment;
};

/// Rounds every time step with one shared set of clocks and maps copies back
/// to original facilities.
RoundedSolution round_all(const PreprocessedSolution& prep, const Clocks& clocks);

RoundedSolution read_rounded(const std::string& path);
void write_rounded(const RoundedSolution& sol, const std::string& path, std::uint64_t seed);

}  // namespace dynfl
