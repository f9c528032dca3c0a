#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>
#include <set>

#include "dynfl/errors.hpp"
#include "dynfl/evaluate.hpp"
#include "dynfl/lp.hpp"
#include "dynfl/rounding.hpp"
#include "test_support.hpp"

using namespace dynfl;

namespace {

// Support-only fixture: copy/client counts plus explicit connection sets.
// Opening fractions are placeholders; the graph operations read only the
// support and the clocks.
PreprocessedSolution support_fixture(int n_copies, int n_clients,
                                     std::vector<std::vector<int>> connections) {
  PreprocessedSolution prep;
  prep.T = 1;
  prep.n_originals = n_copies;
  prep.n_clients = n_clients;
  prep.copy_original.resize(n_copies);
  for (int c = 0; c < n_copies; ++c) prep.copy_original[c] = c;
  prep.copy_fraction.assign(n_copies, 0.5);
  prep.copies_of.resize(n_copies);
  for (int c = 0; c < n_copies; ++c) prep.copies_of[c] = {c};
  prep.active.assign(1, std::vector<char>(n_copies, 1));
  prep.connections = {std::move(connections)};
  return prep;
}

Clocks manual_clocks(std::vector<double> fac, std::vector<double> cli) {
  Clocks c;
  c.facility = std::move(fac);
  c.client = std::move(cli);
  return c;
}

}  // namespace

TEST_CASE("clock inverse CDF") {
  CHECK(rng::clock_from_uniform(std::exp(-1.0), 1.0) == doctest::Approx(1.0).epsilon(1e-14));
  CHECK(rng::clock_from_uniform(std::exp(-1.0), 2.0) == doctest::Approx(0.5).epsilon(1e-14));
}

TEST_CASE("deterministic clocks: same seed, same values; trials shift the seed only") {
  std::mt19937_64 rng(42);
  FractionalSolution f = testsupport::random_grid_fractional(3, 4, 2, 4, 0.5, rng);
  PreprocessedSolution prep = duplicate_facilities(f);
  Clocks a = sample_clocks(prep, 7);
  Clocks b = sample_clocks(prep, 7);
  Clocks c = sample_clocks(prep, 8);
  CHECK(a.facility == b.facility);
  CHECK(a.client == b.client);
  CHECK(a.facility != c.facility);
  for (double v : a.facility) CHECK(v > 0.0);
  for (double v : a.client) CHECK(v > 0.0);
}

TEST_CASE("smallest-clock competition frequency matches the rate ratio") {
  // Rates (1, 3): the first clock is the minimum with probability 1/4.
  const int n = 100000;
  int wins = 0;
  for (int s = 0; s < n; ++s) {
    double q1 = rng::clock_from_uniform(rng::unit_uniform(s, rng::kFacilityStream, 0), 1.0);
    double q2 = rng::clock_from_uniform(rng::unit_uniform(s, rng::kFacilityStream, 1), 3.0);
    if (q1 < q2) ++wins;
  }
  double freq = static_cast<double>(wins) / n;
  double sigma = std::sqrt(0.25 * 0.75 / n);
  CHECK(std::abs(freq - 0.25) <= 3.0 * sigma);
}

TEST_CASE("four-vertex worked example: arcs, paths, rounding") {
  // Clients {0,1}, copies {0,1}; edges 0-0, 0-1, 1-1.
  PreprocessedSolution prep = support_fixture(2, 2, {{0, 1}, {1}});
  Clocks clocks = manual_clocks({0.9, 0.3}, {0.5, 0.2});
  ConnectionGraph g = build_connection_graph(prep, 0, clocks);

  CHECK(g.client_out == std::vector<int>{1, 1});
  REQUIRE(g.support.copies == std::vector<int>{0, 1});
  CHECK(g.copy_out[0] == 0);  // copy 0's only neighbor is client 0
  CHECK(g.copy_out[1] == 1);  // client 1 has the smaller clock

  std::vector<PathVertex> p0 = connection_path(0, g);
  REQUIRE(p0.size() == 3);
  CHECK(p0[0] == PathVertex{false, 0});
  CHECK(p0[1] == PathVertex{true, 1});
  CHECK(p0[2] == PathVertex{false, 1});
  std::vector<PathVertex> p1 = connection_path(1, g);
  REQUIRE(p1.size() == 2);
  CHECK(p1[0] == PathVertex{false, 1});
  CHECK(p1[1] == PathVertex{true, 1});

  TimestepRounding r = round_timestep_graph(prep, 0, clocks);
  CHECK(r.open_copies == std::vector<int>{1});
  CHECK(r.assignment == std::vector<int>{1, 1});

  TimestepRounding seq = round_timestep_sequential(prep, 0, clocks);
  CHECK(seq.open_copies == r.open_copies);
  CHECK(seq.assignment == r.assignment);
}

TEST_CASE("single client and copy form the 2-cycle") {
  PreprocessedSolution prep = support_fixture(1, 1, {{0}});
  Clocks clocks = manual_clocks({1.7}, {0.4});
  ConnectionGraph g = build_connection_graph(prep, 0, clocks);
  std::vector<PathVertex> p = connection_path(0, g);
  REQUIRE(p.size() == 2);
  CHECK(p[0] == PathVertex{false, 0});
  CHECK(p[1] == PathVertex{true, 0});
  TimestepRounding r = round_timestep_graph(prep, 0, clocks);
  CHECK(r.open_copies == std::vector<int>{0});
  CHECK(r.assignment == std::vector<int>{0});
  TimestepRounding s = round_timestep_sequential(prep, 0, clocks);
  CHECK(s.open_copies == r.open_copies);
  CHECK(s.assignment == r.assignment);
}

TEST_CASE("path ending at a client assigns the second-to-last vertex") {
  // Edges: c0-{f0,f1}, c1-{f1}. Clocks make c0 walk to f1 then c1, whose arc
  // returns to f1; the path ends at client c1 and c0 connects to f1.
  PreprocessedSolution prep = support_fixture(2, 2, {{0, 1}, {1}});
  Clocks clocks = manual_clocks({5.0, 1.0}, {2.0, 1.0});
  ConnectionGraph g = build_connection_graph(prep, 0, clocks);
  std::vector<PathVertex> p = connection_path(0, g);
  REQUIRE(p.size() == 3);
  CHECK(p.back() == PathVertex{false, 1});
  TimestepRounding r = round_timestep_graph(prep, 0, clocks);
  CHECK(r.assignment[0] == 1);
}

TEST_CASE("every path ends adjacent to a 2-cycle and clocks decrease along it") {
  std::mt19937_64 rng(2024);
  for (int round = 0; round < 40; ++round) {
    FractionalSolution f = testsupport::random_grid_fractional(4, 6, 3, 8, 0.4, rng);
    PreprocessedSolution prep = duplicate_facilities(f);
    Clocks clocks = sample_clocks(prep, 1000 + round);
    for (int t = 0; t < prep.T; ++t) {
      ConnectionGraph g = build_connection_graph(prep, t, clocks);
      for (int j = 0; j < prep.n_clients; ++j) {
        std::vector<PathVertex> p = connection_path(j, g);
        REQUIRE(p.size() >= 2);
        // Successor of the last vertex is the second-to-last vertex.
        const PathVertex& last = p.back();
        PathVertex succ;
        if (last.is_facility)
          succ = {false, g.copy_out[g.support.copy_pos[last.id]]};
        else
          succ = {true, g.client_out[last.id]};
        CHECK(succ == p[p.size() - 2]);
        // Client clocks strictly decrease at client positions, facility
        // clocks at facility positions.
        double last_client = -1.0, last_fac = -1.0;
        for (const PathVertex& v : p) {
          if (v.is_facility) {
            if (last_fac >= 0) CHECK(clocks.facility[v.id] < last_fac);
            last_fac = clocks.facility[v.id];
          } else {
            if (last_client >= 0) CHECK(clocks.client[v.id] < last_client);
            last_client = clocks.client[v.id];
          }
        }
      }
    }
  }
}

TEST_CASE("verify rejects a long cycle") {
  // Hand-built broken orientation: c0 -> f0 -> c1 -> f1 -> c0 is a 4-cycle.
  ConnectionGraph g;
  g.support.t = 0;
  g.support.n_clients = 2;
  g.support.copies = {0, 1};
  g.support.copy_pos = {0, 1};
  g.support.clients_of = {{0, 1}, {0, 1}};
  g.support.fac_of = {{0, 1}, {0, 1}};
  g.client_out = {0, 1};
  g.copy_out = {1, 0};
  CHECK_THROWS_AS(g.verify(), SolverError);
}

TEST_CASE("build_support rejects isolated clients") {
  PreprocessedSolution prep = support_fixture(1, 2, {{0}, {}});
  CHECK_THROWS_AS(build_support(prep, 0), DataError);
}

TEST_CASE("graph and sequential procedures agree on random inputs") {
  std::mt19937_64 rng(555);
  for (int round = 0; round < 100; ++round) {
    FractionalSolution f = testsupport::random_grid_fractional(4, 5, 2, 8, 0.5, rng);
    PreprocessedSolution prep = duplicate_facilities(f);
    for (std::uint64_t seed = 0; seed < 3; ++seed) {
      Clocks clocks = sample_clocks(prep, 9000 + 10 * round + seed);
      for (int t = 0; t < prep.T; ++t) {
        TimestepRounding a = round_timestep_graph(prep, t, clocks);
        TimestepRounding b = round_timestep_sequential(prep, t, clocks);
        CHECK(a.open_copies == b.open_copies);
        CHECK(a.assignment == b.assignment);
      }
    }
  }
}

TEST_CASE("rounding is deterministic in (prep, seed)") {
  std::mt19937_64 rng(68);
  FractionalSolution f = testsupport::random_grid_fractional(3, 5, 3, 8, 0.5, rng);
  PreprocessedSolution prep = duplicate_facilities(f);
  RoundedSolution a = round_all(prep, sample_clocks(prep, 31));
  RoundedSolution b = round_all(prep, sample_clocks(prep, 31));
  CHECK(a.open_facilities == b.open_facilities);
  CHECK(a.assignment == b.assignment);
  CHECK(a.open_copies == b.open_copies);
}

TEST_CASE("time-constant connections give identical assignments every step") {
  std::mt19937_64 rng(77);
  FractionalSolution f = testsupport::random_grid_fractional(3, 5, 4, 8, 1.1, rng);
  PreprocessedSolution prep = duplicate_facilities(f);
  for (std::uint64_t seed = 0; seed < 20; ++seed) {
    RoundedSolution sol = round_all(prep, sample_clocks(prep, seed));
    for (int t = 1; t < prep.T; ++t) {
      CHECK(sol.assignment[t] == sol.assignment[0]);
      CHECK(sol.open_facilities[t] == sol.open_facilities[0]);
    }
  }
}

TEST_CASE("round_all with T=1 equals the single-step rounding") {
  std::mt19937_64 rng(81);
  FractionalSolution f = testsupport::random_grid_fractional(3, 4, 1, 8, 0.5, rng);
  PreprocessedSolution prep = duplicate_facilities(f);
  Clocks clocks = sample_clocks(prep, 5);
  RoundedSolution sol = round_all(prep, clocks);
  TimestepRounding r = round_timestep_graph(prep, 0, clocks);
  CHECK(sol.open_copies[0] == r.open_copies);
  CHECK(sol.copy_assignment[0] == r.assignment);
}

TEST_CASE("rounded cost is never below the LP optimum") {
  for (std::uint64_t seed : {3u, 4u, 5u}) {
    Instance inst = generate_drifting(3, 4, 3, 0.3, 0.8, seed);
    FractionalSolution frac = solve(build_relaxation(inst));
    PreprocessedSolution prep = duplicate_facilities(stabilize(frac));
    for (std::uint64_t s = 0; s < 10; ++s) {
      RoundedSolution sol = round_all(prep, sample_clocks(prep, s));
      CostBreakdown cb = cost(inst, sol);
      CHECK(cb.total >= frac.objective - 1e-9);
    }
  }
}

TEST_CASE("every assigned facility is open") {
  std::mt19937_64 rng(4096);
  for (int round = 0; round < 20; ++round) {
    FractionalSolution f = testsupport::random_grid_fractional(4, 6, 2, 8, 0.5, rng);
    PreprocessedSolution prep = duplicate_facilities(f);
    RoundedSolution sol = round_all(prep, sample_clocks(prep, round));
    for (int t = 0; t < prep.T; ++t) {
      std::set<int> open(sol.open_facilities[t].begin(), sol.open_facilities[t].end());
      CHECK_FALSE(sol.open_facilities[t].empty());
      for (int j = 0; j < prep.n_clients; ++j) CHECK(open.count(sol.assignment[t][j]) == 1);
    }
  }
}

TEST_CASE("rounded solution io round trips") {
  testsupport::TempDir dir;
  std::mt19937_64 rng(31337);
  FractionalSolution f = testsupport::random_grid_fractional(3, 4, 2, 4, 0.5, rng);
  f.facility_ids = {"a", "b", "c"};
  f.client_ids = {"w", "x", "y", "z"};
  PreprocessedSolution prep = duplicate_facilities(f);
  RoundedSolution sol = round_all(prep, sample_clocks(prep, 17));
  std::string path = dir.file("sol.json");
  write_rounded(sol, path, 17);
  RoundedSolution back = read_rounded(path);
  CHECK(back.T == sol.T);
  CHECK(back.open_facilities == sol.open_facilities);
  CHECK(back.assignment == sol.assignment);
  CHECK(back.open_copies == sol.open_copies);
  CHECK(back.copy_assignment == sol.copy_assignment);
}
