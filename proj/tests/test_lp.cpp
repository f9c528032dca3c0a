#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include "doctest.h"

#include <cmath>

#include "dynfl/errors.hpp"
#include "dynfl/lp.hpp"
#include "dynfl/oracle.hpp"
#include "test_support.hpp"

using namespace dynfl;

namespace {

Instance unit_instance(double f, double d, int T, double g) {
  Instance inst = Instance::create(1, 1, T);
  inst.g = g;
  for (int t = 0; t < T; ++t) {
    inst.open_cost(0, t) = f;
    inst.dist(t, 0, 0) = d;
  }
  return inst;
}

}  // namespace

TEST_CASE("relaxation size: one facility, one client, T=1") {
  Relaxation rel = build_relaxation(unit_instance(5, 2, 1, 0));
  CHECK(rel.lp.num_vars == 2);
  REQUIRE(rel.lp.rows.size() == 2);
  CHECK(rel.lp.rows[0].sense == RowSense::Eq);
  CHECK(rel.lp.rows[0].rhs == 1.0);
  CHECK(rel.lp.rows[1].sense == RowSense::Le);
}

TEST_CASE("relaxation size: 2 facilities, 3 clients, T=2 has 22 columns") {
  Instance inst = generate_drifting(2, 3, 2, 0.1, 1.0, 5);
  Relaxation rel = build_relaxation(inst);
  CHECK(rel.lp.num_vars == 22);  // 4 y + 12 x + 6 z
  CHECK(rel.num_vars() == 22);
  // Rows: 6 assignment, 12 x<=y, 6 switching.
  CHECK(rel.lp.rows.size() == 24);
}

TEST_CASE("T=1 has no switching variables or rows") {
  Instance inst = generate_drifting(3, 4, 1, 0.0, 1.0, 11);
  Relaxation rel = build_relaxation(inst);
  CHECK(rel.lp.num_vars == 3 * 1 + 3 * 4 * 1);
  CHECK(rel.lp.rows.size() == 4 + 12);
}

TEST_CASE("forced instance: y = x = 1, objective 7") {
  FractionalSolution sol = solve(build_relaxation(unit_instance(5, 2, 1, 0)));
  CHECK(sol.objective == doctest::Approx(7.0).epsilon(1e-9));
  CHECK(sol.xv(0, 0, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sol.yv(0, 0) == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sol.opening == doctest::Approx(5.0));
  CHECK(sol.connection == doctest::Approx(2.0));
  CHECK(sol.switching == 0.0);
}

TEST_CASE("two colocated facilities: open the cheap one") {
  Instance inst = Instance::create(2, 1, 1);
  inst.open_cost(0, 0) = 1.0;
  inst.open_cost(1, 0) = 10.0;
  // Both at distance 0 from the client; the two vertices of the LP cost 1
  // and 10, so the optimum is 1.
  FractionalSolution sol = solve(build_relaxation(inst));
  CHECK(sol.objective == doctest::Approx(1.0).epsilon(1e-9));
  CHECK(sol.yv(0, 0) == doctest::Approx(1.0));
  CHECK(sol.yv(0, 1) == doctest::Approx(0.0));
}

TEST_CASE("identical metrics across steps give z = 0 at the optimum") {
  Instance inst = generate_drifting(3, 4, 2, 0.0, 1.0, 21);  // drift 0, g > 0
  FractionalSolution sol = solve(build_relaxation(inst));
  for (int i = 0; i < 3; ++i)
    for (int j = 0; j < 4; ++j) {
      CHECK(std::abs(sol.zv(0, i, j)) <= 1e-9);
      CHECK(sol.xv(0, i, j) == doctest::Approx(sol.xv(1, i, j)).epsilon(1e-7));
    }
  CHECK(sol.switching <= 1e-9);
}

TEST_CASE("cost breakdown of the all-zero vector is zero") {
  Instance inst = generate_drifting(2, 2, 2, 0.1, 1.0, 3);
  FractionalSolution zero = FractionalSolution::zeros(2, 2, 2);
  LpComponents c = lp_cost_breakdown(zero, inst);
  CHECK(c.opening == 0.0);
  CHECK(c.connection == 0.0);
  CHECK(c.switching == 0.0);
}

TEST_CASE("cost breakdown matches the forced solution and the solver objective") {
  Instance inst = unit_instance(5, 2, 1, 0);
  FractionalSolution sol = solve(build_relaxation(inst));
  LpComponents c = lp_cost_breakdown(sol, inst);
  CHECK(c.opening == doctest::Approx(5.0));
  CHECK(c.connection == doctest::Approx(2.0));
  CHECK(c.switching == 0.0);

  for (std::uint64_t seed : {1u, 2u, 3u}) {
    Instance rnd = generate_drifting(3, 5, 3, 0.2, 0.8, seed);
    FractionalSolution s = solve(build_relaxation(rnd));
    LpComponents b = lp_cost_breakdown(s, rnd);
    CHECK(b.total() == doctest::Approx(s.objective).epsilon(1e-9));
    CHECK(b.opening == doctest::Approx(s.opening).epsilon(1e-9));
    CHECK(b.connection == doctest::Approx(s.connection).epsilon(1e-9));
    CHECK(b.switching == doctest::Approx(s.switching).epsilon(1e-9));
  }
}

TEST_CASE("cost breakdown rejects mismatched dimensions") {
  Instance inst = generate_drifting(2, 2, 2, 0.1, 1.0, 3);
  FractionalSolution wrong = FractionalSolution::zeros(2, 3, 2);
  CHECK_THROWS_AS(lp_cost_breakdown(wrong, inst), DataError);
}

TEST_CASE("LP objective scales linearly with the cost vector") {
  Instance inst = generate_drifting(3, 5, 3, 0.25, 0.9, 77);
  FractionalSolution base = solve(build_relaxation(inst));
  double c = 3.7;
  Instance scaled = inst;
  scaled.g *= c;
  for (double& v : scaled.open_cost_data) v *= c;
  for (double& v : scaled.dist_data) v *= c;
  FractionalSolution s = solve(build_relaxation(scaled));
  CHECK(s.objective == doctest::Approx(c * base.objective).epsilon(1e-8));
}

TEST_CASE("returned solutions satisfy feasibility at solver tolerance") {
  for (std::uint64_t seed : {5u, 6u}) {
    Instance inst = generate_drifting(3, 4, 3, 0.3, 1.2, seed);
    FractionalSolution sol = solve(build_relaxation(inst), 1e-9);
    std::string why;
    CHECK_MESSAGE(check_feasible(sol, 1e-9, &why), why);
  }
}

TEST_CASE("LP optimum lower-bounds every integral solution") {
  for (std::uint64_t seed : {10u, 11u, 12u, 13u}) {
    Instance inst = generate_drifting(3, 4, 2, 0.2, 0.6, seed);
    FractionalSolution sol = solve(build_relaxation(inst));
    ExactSolution exact = brute_force(inst);
    CHECK(sol.objective <= exact.cost + 1e-9);
  }
}

TEST_CASE("fractional solution file io round trips") {
  testsupport::TempDir dir;
  Instance inst = generate_drifting(2, 3, 2, 0.1, 0.5, 8);
  FractionalSolution sol = solve(build_relaxation(inst));
  std::string path = dir.file("frac.json");
  write_fractional(sol, path);
  FractionalSolution back = read_fractional(path);
  CHECK(back.T == sol.T);
  CHECK(back.nf == sol.nf);
  CHECK(back.nc == sol.nc);
  CHECK(back.x == sol.x);
  CHECK(back.y == sol.y);
  CHECK(back.z == sol.z);
  CHECK(back.objective == doctest::Approx(sol.objective));
  CHECK(back.facility_ids == sol.facility_ids);
}
