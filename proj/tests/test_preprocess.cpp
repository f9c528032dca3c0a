#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>
#include <random>

#include "dynfl/errors.hpp"
#include "dynfl/lp.hpp"
#include "dynfl/preprocess.hpp"
#include "test_support.hpp"

using namespace dynfl;
using testsupport::prep_components;

namespace {

// T=3, two facilities, one client with rows (1,0), (0.6,0.4), (0,1).
FractionalSolution three_step_example() {
  FractionalSolution f = FractionalSolution::zeros(3, 2, 1);
  double rows[3][2] = {{1.0, 0.0}, {0.6, 0.4}, {0.0, 1.0}};
  for (int t = 0; t < 3; ++t)
    for (int i = 0; i < 2; ++i) {
      f.xv(t, i, 0) = rows[t][i];
      f.yv(t, i) = rows[t][i];
    }
  for (int t = 0; t < 2; ++t)
    for (int i = 0; i < 2; ++i)
      f.zv(t, i, 0) = std::max(0.0, f.xv(t, i, 0) - f.xv(t + 1, i, 0));
  return f;
}

}  // namespace

TEST_CASE("boundaries: a time-constant row gives a single window") {
  std::mt19937_64 rng(3);
  FractionalSolution f = testsupport::random_grid_fractional(3, 2, 5, 4, 1.1, rng);  // stay always
  for (int j = 0; j < 2; ++j) CHECK(compute_boundaries(f, j) == std::vector<int>{0, 5});
}

TEST_CASE("boundaries: the three-step worked example splits at step 2") {
  FractionalSolution f = three_step_example();
  // Window [0,2) keeps min-sum 0.6 >= 1/2; extending to [0,3) drops to 0.
  CHECK(compute_boundaries(f, 0) == std::vector<int>{0, 2, 3});
}

TEST_CASE("boundaries: disjoint single-step rows split every step") {
  FractionalSolution f = FractionalSolution::zeros(2, 2, 1);
  f.xv(0, 0, 0) = 1.0;
  f.xv(1, 1, 0) = 1.0;
  f.yv(0, 0) = f.yv(1, 1) = 1.0;
  f.zv(0, 0, 0) = 1.0;
  CHECK(compute_boundaries(f, 0) == std::vector<int>{0, 1, 2});
}

TEST_CASE("stabilize: time-constant input keeps x, doubles y, empty change sets") {
  std::mt19937_64 rng(17);
  FractionalSolution f = testsupport::random_grid_fractional(3, 4, 4, 4, 1.1, rng);
  FractionalSolution s = stabilize(f);
  CHECK(s.x == f.x);
  for (std::size_t k = 0; k < f.y.size(); ++k) CHECK(s.y[k] == 2.0 * f.y[k]);
  for (int t = 0; t + 1 < 4; ++t) CHECK(change_set(s, t).empty());
}

TEST_CASE("stabilize: the three-step worked example") {
  FractionalSolution s = stabilize(three_step_example());
  // On [0,2) the min vector is (0.6, 0), normalized to (1, 0); on [2,3) it
  // is (0, 1).
  for (int t = 0; t < 2; ++t) {
    CHECK(s.xv(t, 0, 0) == doctest::Approx(1.0).epsilon(1e-12));
    CHECK(s.xv(t, 1, 0) == doctest::Approx(0.0));
  }
  CHECK(s.xv(2, 0, 0) == 0.0);
  CHECK(s.xv(2, 1, 0) == doctest::Approx(1.0));
  CHECK(change_set(s, 0).empty());
  CHECK(change_set(s, 1) == std::vector<int>{0});
  // Total z mass equals twice the input's.
  double zsum = 0.0;
  for (double v : s.z) zsum += v;
  CHECK(zsum == doctest::Approx(2.0 * 1.0).epsilon(1e-12));
}

TEST_CASE("stabilize contracts hold on random LP optima") {
  for (std::uint64_t seed : {1u, 2u, 3u, 4u, 5u, 6u}) {
    Instance inst = generate_drifting(3, 4, 3, 0.4, 0.5, seed);
    FractionalSolution frac = solve(build_relaxation(inst));
    FractionalSolution stab = stabilize(frac);

    std::string why;
    CHECK_MESSAGE(check_feasible(stab, 1e-7, &why), why);

    LpComponents before = lp_cost_breakdown(frac, inst);
    LpComponents after = lp_cost_breakdown(stab, inst);
    CHECK(after.opening <= 2.0 * before.opening + 1e-9);
    CHECK(after.connection <= 2.0 * before.connection + 1e-9);
    CHECK(after.switching <= 2.0 * before.switching + 1e-9);

    double zsum = 0.0;
    for (double v : stab.z) zsum += v;
    long long changes = 0;
    for (int t = 0; t + 1 < stab.T; ++t)
      changes += static_cast<long long>(change_set(stab, t).size());
    CHECK(static_cast<double>(changes) <= zsum + 1e-9);
  }
}

TEST_CASE("stabilize rejects infeasible input") {
  FractionalSolution bad = FractionalSolution::zeros(2, 2, 1);  // rows sum to 0
  CHECK_THROWS_AS(stabilize(bad), DataError);
}

TEST_CASE("duplication: facility opened by .6 with connections .1/.4/.4/.6") {
  // Facility 0 carries the worked values; facility 1 absorbs the rest.
  FractionalSolution f = FractionalSolution::zeros(1, 2, 4);
  double xs[4] = {0.1, 0.4, 0.4, 0.6};
  for (int j = 0; j < 4; ++j) {
    f.xv(0, 0, j) = xs[j];
    f.xv(0, 1, j) = 1.0 - xs[j];
  }
  f.yv(0, 0) = 0.6;
  f.yv(0, 1) = 0.9;
  PreprocessedSolution prep = duplicate_facilities(f);

  REQUIRE(prep.copies_of[0].size() == 3);
  CHECK(prep.copy_fraction[prep.copies_of[0][0]] == doctest::Approx(0.1).epsilon(1e-12));
  CHECK(prep.copy_fraction[prep.copies_of[0][1]] == doctest::Approx(0.3).epsilon(1e-12));
  CHECK(prep.copy_fraction[prep.copies_of[0][2]] == doctest::Approx(0.2).epsilon(1e-12));

  // Clients connect to the first 1, 2, 2, 3 copies respectively.
  int expected[4] = {1, 2, 2, 3};
  for (int j = 0; j < 4; ++j) {
    int count = 0;
    for (int c : prep.connections[0][j])
      if (prep.copy_original[c] == 0) ++count;
    CHECK(count == expected[j]);
  }
}

TEST_CASE("duplication: shared thresholds across two time steps") {
  // Facility 0 sees values {.3,.4,.8} at t=0 and {.1,.7} at t=1, so the
  // shared threshold set is {.1,.3,.4,.7,.8} and the copies are opened by
  // .1, .2, .1, .3, .1.
  FractionalSolution f = FractionalSolution::zeros(2, 2, 2);
  f.xv(0, 0, 0) = 0.3;
  f.xv(0, 0, 1) = 0.4;
  f.yv(0, 0) = 0.8;
  f.xv(1, 0, 0) = 0.1;
  f.xv(1, 0, 1) = 0.7;
  f.yv(1, 0) = 0.7;
  for (int t = 0; t < 2; ++t)
    for (int j = 0; j < 2; ++j) f.xv(t, 1, j) = 1.0 - f.xv(t, 0, j);
  f.yv(0, 1) = 0.7;
  f.yv(1, 1) = 0.9;
  for (int i = 0; i < 2; ++i)
    for (int j = 0; j < 2; ++j) f.zv(0, i, j) = std::max(0.0, f.xv(0, i, j) - f.xv(1, i, j));

  PreprocessedSolution prep = duplicate_facilities(f);
  REQUIRE(prep.copies_of[0].size() == 5);
  double expected[5] = {0.1, 0.2, 0.1, 0.3, 0.1};
  for (int k = 0; k < 5; ++k)
    CHECK(prep.copy_fraction[prep.copies_of[0][k]] == doctest::Approx(expected[k]).epsilon(1e-12));

  // Active prefixes follow y: all five at t=0 (y=.8), first four at t=1.
  for (int k = 0; k < 5; ++k) CHECK(prep.active[0][prep.copies_of[0][k]] == 1);
  for (int k = 0; k < 4; ++k) CHECK(prep.active[1][prep.copies_of[0][k]] == 1);
  CHECK(prep.active[1][prep.copies_of[0][4]] == 0);

  // Connection prefixes follow x: .3 -> 2 copies, .4 -> 3, .1 -> 1, .7 -> 4.
  auto fac0_count = [&](int t, int j) {
    int count = 0;
    for (int c : prep.connections[t][j])
      if (prep.copy_original[c] == 0) ++count;
    return count;
  };
  CHECK(fac0_count(0, 0) == 2);
  CHECK(fac0_count(0, 1) == 3);
  CHECK(fac0_count(1, 0) == 1);
  CHECK(fac0_count(1, 1) == 4);
}

TEST_CASE("duplication: already-split solutions pass through as single copies") {
  FractionalSolution f = FractionalSolution::zeros(2, 2, 2);
  for (int t = 0; t < 2; ++t) {
    f.xv(t, 0, 0) = 0.5;
    f.xv(t, 1, 0) = 0.5;
    f.xv(t, 0, 1) = 0.5;
    f.xv(t, 1, 1) = 0.5;
    f.yv(t, 0) = f.yv(t, 1) = 0.5;
  }
  PreprocessedSolution prep = duplicate_facilities(f);
  CHECK(prep.num_copies() == 2);
  CHECK(prep.copy_fraction[0] == 0.5);
  CHECK(prep.copy_fraction[1] == 0.5);
  std::vector<double> ax, ay;
  prep.aggregate(ax, ay);
  CHECK(ax == f.x);
  CHECK(ay == f.y);
}

TEST_CASE("duplication invariants on random grid solutions") {
  std::mt19937_64 rng(99);
  for (int round = 0; round < 20; ++round) {
    FractionalSolution f = testsupport::random_grid_fractional(3, 5, 3, 8, 0.5, rng);
    PreprocessedSolution prep = duplicate_facilities(f);

    // Aggregating the copies reproduces x and y exactly (grid values sum
    // without rounding).
    std::vector<double> ax, ay;
    prep.aggregate(ax, ay);
    CHECK(ax == f.x);
    CHECK(ay == f.y);

    // Connections only reach active copies and sum back to 1 per client.
    for (int t = 0; t < prep.T; ++t) {
      for (int j = 0; j < prep.n_clients; ++j) {
        double sum = 0.0;
        for (int c : prep.connections[t][j]) {
          CHECK(prep.active[t][c] == 1);
          sum += prep.copy_fraction[c];
        }
        CHECK(sum == doctest::Approx(1.0).epsilon(1e-9));
      }
    }

    // Equal consecutive rows stay equal after duplication.
    for (int t = 0; t + 1 < prep.T; ++t)
      for (int j = 0; j < prep.n_clients; ++j) {
        bool equal_in = true;
        for (int i = 0; i < f.nf && equal_in; ++i)
          equal_in = f.xv(t, i, j) == f.xv(t + 1, i, j);
        if (equal_in) CHECK(prep.connections[t][j] == prep.connections[t + 1][j]);
      }
  }
}

TEST_CASE("equal consecutive rows survive stabilize") {
  std::mt19937_64 rng(7);
  for (int round = 0; round < 10; ++round) {
    FractionalSolution f = testsupport::random_grid_fractional(3, 4, 4, 4, 0.6, rng);
    FractionalSolution s = stabilize(f);
    for (int t = 0; t + 1 < f.T; ++t)
      for (int j = 0; j < f.nc; ++j) {
        bool equal_in = true;
        for (int i = 0; i < f.nf && equal_in; ++i)
          equal_in = f.xv(t, i, j) == f.xv(t + 1, i, j);
        if (!equal_in) continue;
        for (int i = 0; i < f.nf; ++i) CHECK(s.xv(t, i, j) == s.xv(t + 1, i, j));
      }
  }
}

TEST_CASE("duplication preserves pipeline cost to 1e-12 relative") {
  for (std::uint64_t seed : {31u, 32u, 33u}) {
    Instance inst = generate_drifting(3, 5, 3, 0.3, 0.7, seed);
    FractionalSolution stab = stabilize(solve(build_relaxation(inst)));
    PreprocessedSolution prep = duplicate_facilities(stab);
    LpComponents before = lp_cost_breakdown(stab, inst);
    LpComponents after = prep_components(prep, inst);
    CHECK(after.opening == doctest::Approx(before.opening).epsilon(1e-12));
    CHECK(after.connection == doctest::Approx(before.connection).epsilon(1e-12));
    CHECK(after.switching == doctest::Approx(before.switching).epsilon(1e-12));
  }
}

TEST_CASE("change_set flags exactly the perturbed client") {
  std::mt19937_64 rng(55);
  FractionalSolution f = testsupport::random_grid_fractional(3, 4, 2, 4, 1.1, rng);
  CHECK(change_set(f, 0).empty());
  // Move a little mass for client 2 at t=1 between two facilities.
  int a = -1, b = -1;
  for (int i = 0; i < 3; ++i) {
    if (f.xv(1, i, 2) > 0 && a < 0)
      a = i;
    else if (b < 0)
      b = i;
  }
  f.xv(1, a, 2) -= 0.125;
  f.xv(1, b, 2) += 0.125;
  CHECK(change_set(f, 0) == std::vector<int>{2});
}

TEST_CASE("change_set rejects out-of-range steps") {
  std::mt19937_64 rng(5);
  FractionalSolution f = testsupport::random_grid_fractional(2, 2, 2, 4, 0.5, rng);
  CHECK_THROWS_AS(change_set(f, 1), DataError);
  CHECK_THROWS_AS(change_set(f, -1), DataError);
}

TEST_CASE("preprocessed io round trips") {
  testsupport::TempDir dir;
  Instance inst = generate_drifting(3, 4, 3, 0.3, 0.7, 12);
  FractionalSolution frac = solve(build_relaxation(inst));
  PreprocessedSolution prep = duplicate_facilities(stabilize(frac));
  std::string path = dir.file("prep.json");
  write_preprocessed(prep, path);
  PreprocessedSolution back = read_preprocessed(path);
  CHECK(back.T == prep.T);
  CHECK(back.copy_original == prep.copy_original);
  CHECK(back.copy_fraction == prep.copy_fraction);
  CHECK(back.active == prep.active);
  CHECK(back.connections == prep.connections);
  CHECK(back.facility_ids == prep.facility_ids);
  CHECK(back.z_total == doctest::Approx(prep.z_total));
}

TEST_CASE("snapping merges float-noise thresholds") {
  FractionalSolution f = FractionalSolution::zeros(1, 2, 2);
  double v = 0.3;
  double v_noise = 0.3 + 2e-10;  // within the snap tolerance
  f.xv(0, 0, 0) = v;
  f.xv(0, 0, 1) = v_noise;
  f.xv(0, 1, 0) = 1.0 - v;
  f.xv(0, 1, 1) = 1.0 - v_noise;
  f.yv(0, 0) = 0.31;
  f.yv(0, 1) = 0.71;
  PreprocessedSolution prep = duplicate_facilities(f);
  // One threshold near .3 plus the y slab above it for facility 0.
  CHECK(prep.copies_of[0].size() == 2);
  CHECK(prep.connections[0][0] == prep.connections[0][1]);
}

TEST_CASE("slice_time keeps copies and slices activity") {
  std::mt19937_64 rng(123);
  FractionalSolution f = testsupport::random_grid_fractional(3, 4, 3, 4, 0.5, rng);
  PreprocessedSolution prep = duplicate_facilities(f);
  PreprocessedSolution sliced = slice_time(prep, 1, 3);
  CHECK(sliced.T == 2);
  CHECK(sliced.copy_original == prep.copy_original);
  CHECK(sliced.copy_fraction == prep.copy_fraction);
  CHECK(sliced.connections[0] == prep.connections[1]);
  CHECK(sliced.connections[1] == prep.connections[2]);
  CHECK(sliced.active[0] == prep.active[1]);
  CHECK_THROWS_AS(slice_time(prep, 2, 2), DataError);
}
