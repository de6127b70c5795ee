#include <cmath>
#include <vector>

#include "doctest.h"
#include "trimarket/rng.hpp"
#include "trimarket/simplex.hpp"

using namespace trimarket;

namespace {

Lp::Row row(std::vector<int> idx, std::vector<double> val, double lo, double hi,
            std::string name = "") {
  Lp::Row r;
  r.idx = std::move(idx);
  r.val = std::move(val);
  r.lo = lo;
  r.hi = hi;
  r.name = std::move(name);
  return r;
}

// Dual objective of a bounded-variable LP at (y, d): sum of duals times the
// bounds they act on. Used for the strong-duality checks below.
double dual_objective(const Lp& lp, const LpSolution& sol) {
  double v = 0.0;
  for (int i = 0; i < lp.num_rows(); ++i) {
    double y = sol.row_dual[static_cast<std::size_t>(i)];
    if (y == 0.0) continue;
    const auto& r = lp.rows[static_cast<std::size_t>(i)];
    double b = (lp.maximize ? y < 0.0 : y > 0.0) ? r.lo : r.hi;
    v += y * b;
  }
  for (int j = 0; j < lp.num_vars(); ++j) {
    double d = sol.reduced_cost[static_cast<std::size_t>(j)];
    if (d == 0.0) continue;
    double b = (lp.maximize ? d < 0.0 : d > 0.0) ? lp.lo[static_cast<std::size_t>(j)]
                                                 : lp.hi[static_cast<std::size_t>(j)];
    v += d * b;
  }
  return v;
}

}  // namespace

TEST_CASE("single bounded variable maximization") {
  Lp lp;
  lp.maximize = true;
  lp.add_var("x", -kInf, kInf, 1.0);
  lp.add_row(row({0}, {1.0}, -kInf, 3.0, "cap"));
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == SolveStatus::kOptimal);
  CHECK(sol.x[0] == doctest::Approx(3.0));
  CHECK(sol.objective == doctest::Approx(3.0));
  CHECK(sol.row_dual[0] == doctest::Approx(1.0));
}

TEST_CASE("infeasible bound pair") {
  Lp lp;
  lp.add_var("x", -kInf, kInf, 1.0);
  lp.add_row(row({0}, {1.0}, -kInf, 0.0));
  lp.add_row(row({0}, {1.0}, 1.0, kInf));
  BoundedSimplex s(lp);
  CHECK(s.solve() == SolveStatus::kInfeasible);
}

TEST_CASE("unbounded ray detected") {
  Lp lp;
  lp.maximize = true;
  lp.add_var("x", 0.0, kInf, 1.0);
  lp.add_row(row({0}, {-1.0}, -kInf, 5.0));
  BoundedSimplex s(lp);
  CHECK(s.solve() == SolveStatus::kUnbounded);
}

TEST_CASE("two-variable diet-style LP") {
  // min 2x + 3y  s.t.  x + y >= 4, x + 3y >= 6, x,y >= 0
  // Optimum at (3, 1): objective 9.
  Lp lp;
  lp.add_var("x", 0.0, kInf, 2.0);
  lp.add_var("y", 0.0, kInf, 3.0);
  lp.add_row(row({0, 1}, {1.0, 1.0}, 4.0, kInf));
  lp.add_row(row({0, 1}, {1.0, 3.0}, 6.0, kInf));
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == SolveStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(9.0));
  CHECK(sol.x[0] == doctest::Approx(3.0));
  CHECK(sol.x[1] == doctest::Approx(1.0));
  CHECK(dual_objective(lp, sol) == doctest::Approx(9.0));
}

TEST_CASE("equality and ranged rows with free variable") {
  // min x + 2y - z  s.t.  x + y + z = 5,  1 <= y - z <= 2,  0<=x<=10, 0<=y<=4, z free
  Lp lp;
  lp.add_var("x", 0.0, 10.0, 1.0);
  lp.add_var("y", 0.0, 4.0, 2.0);
  lp.add_var("z", -kInf, kInf, -1.0);
  lp.add_row(row({0, 1, 2}, {1.0, 1.0, 1.0}, 5.0, 5.0));
  lp.add_row(row({1, 2}, {1.0, -1.0}, 1.0, 2.0));
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == SolveStatus::kOptimal);
  // z = y - r where r in [1,2]; substitute: obj = x + 2y - y + r = x + y + r;
  // x + 2y - r = 5. Minimize x + y + r: greedy y=2.5? exhaustively the
  // optimum is x=0, r=1, y=3 -> z=2, obj = 0 + 6 - 2 = 4.
  CHECK(sol.objective == doctest::Approx(4.0));
  double act0 = sol.x[0] + sol.x[1] + sol.x[2];
  CHECK(act0 == doctest::Approx(5.0));
  CHECK(dual_objective(lp, sol) == doctest::Approx(sol.objective));
}

TEST_CASE("degenerate LP does not cycle") {
  // Classic degeneracy: many redundant constraints through the origin.
  Lp lp;
  lp.maximize = true;
  lp.add_var("x", 0.0, kInf, 0.75);
  lp.add_var("y", 0.0, kInf, -150.0);
  lp.add_var("z", 0.0, kInf, 0.02);
  lp.add_var("w", 0.0, kInf, -6.0);
  lp.add_row(row({0, 1, 2, 3}, {0.25, -60.0, -0.04, 9.0}, -kInf, 0.0));
  lp.add_row(row({0, 1, 2, 3}, {0.5, -90.0, -0.02, 3.0}, -kInf, 0.0));
  lp.add_row(row({2}, {1.0}, -kInf, 1.0));
  LpSolution sol = solve_lp(lp);
  REQUIRE(sol.status == SolveStatus::kOptimal);
  CHECK(sol.objective == doctest::Approx(0.05).epsilon(1e-6));
}

TEST_CASE("warm start after bound change reuses the basis") {
  Lp lp;
  lp.maximize = true;
  lp.add_var("x", 0.0, 1.0, 3.0);
  lp.add_var("y", 0.0, 1.0, 2.0);
  lp.add_row(row({0, 1}, {1.0, 1.0}, -kInf, 1.5));
  BoundedSimplex s(lp);
  REQUIRE(s.solve() == SolveStatus::kOptimal);
  CHECK(s.objective() == doctest::Approx(4.0));  // x=1, y=0.5
  s.set_var_bounds(0, 0.0, 0.0);
  REQUIRE(s.solve() == SolveStatus::kOptimal);
  CHECK(s.objective() == doctest::Approx(2.0));  // y=1
  s.reset_var_bounds(0);
  REQUIRE(s.solve() == SolveStatus::kOptimal);
  CHECK(s.objective() == doctest::Approx(4.0));
}

TEST_CASE("strong duality on random bounded LPs") {
  // Feasibility by construction: random x0 within bounds, rows get ranges
  // around their activity at x0. Checks primal/dual objective agreement and
  // complementary slackness at the reported solution.
  SplitMix64 rng(20240817u);
  int solved = 0;
  for (int trial = 0; trial < 1000; ++trial) {
    int n = 1 + static_cast<int>(rng.next_below(6));
    int m = 1 + static_cast<int>(rng.next_below(6));
    Lp lp;
    lp.maximize = (rng.next_u64() & 1u) != 0;
    std::vector<double> x0;
    for (int j = 0; j < n; ++j) {
      double lo = rng.next_in(-5.0, 0.0);
      double hi = lo + rng.next_in(0.0, 8.0);
      lp.add_var("x" + std::to_string(j), lo, hi, rng.next_in(-3.0, 3.0));
      x0.push_back(rng.next_in(lo, hi));
    }
    for (int i = 0; i < m; ++i) {
      Lp::Row r;
      double act = 0.0;
      for (int j = 0; j < n; ++j) {
        if (rng.next_unit() < 0.3) continue;
        double a = rng.next_in(-2.0, 2.0);
        r.idx.push_back(j);
        r.val.push_back(a);
        act += a * x0[static_cast<std::size_t>(j)];
      }
      double span = rng.next_in(0.0, 4.0);
      switch (rng.next_below(4)) {
        case 0: r.lo = act - span; r.hi = kInf; break;
        case 1: r.lo = -kInf; r.hi = act + span; break;
        case 2: r.lo = act - span; r.hi = act + span; break;
        default: r.lo = act; r.hi = act; break;
      }
      lp.add_row(std::move(r));
    }
    LpSolution sol = solve_lp(lp);
    REQUIRE(sol.status == SolveStatus::kOptimal);
    ++solved;
    double dv = dual_objective(lp, sol);
    CHECK(std::fabs(dv - sol.objective) <= 1e-7 * (1.0 + std::fabs(sol.objective)));
    // Complementary slackness: interior rows need zero dual.
    for (int i = 0; i < lp.num_rows(); ++i) {
      const auto& r = lp.rows[static_cast<std::size_t>(i)];
      double act = 0.0;
      for (std::size_t k = 0; k < r.idx.size(); ++k)
        act += r.val[k] * sol.x[static_cast<std::size_t>(r.idx[k])];
      double dist = std::min(r.lo == -kInf ? kInf : act - r.lo,
                             r.hi == kInf ? kInf : r.hi - act);
      if (dist > 1e-5)
        CHECK(std::fabs(sol.row_dual[static_cast<std::size_t>(i)]) <= 1e-6);
    }
  }
  CHECK(solved == 1000);
}

TEST_CASE("deterministic across repeated solves") {
  SplitMix64 rng(7u);
  Lp lp;
  for (int j = 0; j < 8; ++j) lp.add_var("x", -1.0, 2.0, rng.next_in(-1.0, 1.0));
  for (int i = 0; i < 6; ++i) {
    Lp::Row r;
    for (int j = 0; j < 8; ++j) {
      r.idx.push_back(j);
      r.val.push_back(rng.next_in(-1.0, 1.0));
    }
    r.lo = -2.0;
    r.hi = 2.0;
    lp.add_row(std::move(r));
  }
  LpSolution a = solve_lp(lp);
  LpSolution b = solve_lp(lp);
  REQUIRE(a.status == SolveStatus::kOptimal);
  CHECK(a.objective == b.objective);
  CHECK(a.x == b.x);
  CHECK(a.iterations == b.iterations);
}
