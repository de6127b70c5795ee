#include <algorithm>
#include <cmath>
#include <vector>

#include "doctest.h"
#include "trimarket/case_gen.hpp"
#include "trimarket/euc.hpp"
#include "trimarket/kkt.hpp"
#include "trimarket/rng.hpp"

using namespace trimarket;

namespace {

EucBlock blk(double c, double d, double x_min, double x_max, double y_max) {
  EucBlock b;
  b.benefit_price = c;
  b.reserve_cost_price = d;
  b.x_min = x_min;
  b.x_max = x_max;
  b.y_max = y_max;
  return b;
}

// Brute-force oracle over the block polytope's vertices. The feasible set
// { x_min + y <= x <= x_max, 0 <= y <= y_max } has at most six vertices,
// all of the form (x in {x_min + y, x_max}, y in {0, y_max, x_max - x_min}).
double vertex_optimum(double alpha, double beta, const EucBlock& b) {
  std::vector<double> ys = {0.0, b.y_max, std::max(0.0, std::min(b.y_max, b.x_max - b.x_min))};
  double best = -1e300;
  for (double y : ys) {
    if (y < 0.0 || y > b.y_max) continue;
    for (double x : {b.x_min + y, b.x_max}) {
      if (x < b.x_min + y - 1e-12 || x > b.x_max + 1e-12) continue;
      double v = (b.benefit_price - alpha) * x + (beta - b.reserve_cost_price) * y;
      best = std::max(best, v);
    }
  }
  return best;
}

}  // namespace

TEST_CASE("both margins positive: consume and back reserve fully") {
  BlockResponse r = best_response_block(35.0, 6.0, blk(36, 5, 0, 1, 0.5));
  CHECK(r.x == doctest::Approx(1.0));
  CHECK(r.y == doctest::Approx(0.5));
}

TEST_CASE("both margins negative: stay out") {
  BlockResponse r = best_response_block(36.0, 4.0, blk(35, 5, 0, 1, 0.5));
  CHECK(r.x == doctest::Approx(0.0));
  CHECK(r.y == doctest::Approx(0.0));
}

TEST_CASE("reserve-backed consumption when the combined margin pays") {
  // (c - alpha) + (beta - d) = -1 + 3 = 2 > 0: y = 0.5, x = 0.5.
  BlockResponse r = best_response_block(36.0, 8.0, blk(35, 5, 0, 1, 0.5));
  CHECK(r.x == doctest::Approx(0.5));
  CHECK(r.y == doctest::Approx(0.5));
  CHECK(vertex_optimum(36.0, 8.0, blk(35, 5, 0, 1, 0.5)) == doctest::Approx(1.0));
}

TEST_CASE("forced consumption above a positive floor") {
  BlockResponse r = best_response_block(40.0, 0.0, blk(35, 5, 2, 6, 3));
  CHECK(r.x == doctest::Approx(2.0));
  CHECK(r.y == doctest::Approx(0.0));
  r = best_response_block(40.0, 11.0, blk(35, 5, 2, 6, 3));
  // combined margin -5 + 6 = 1 > 0: y = min(3, 4) = 3, x = 5.
  CHECK(r.y == doctest::Approx(3.0));
  CHECK(r.x == doctest::Approx(5.0));
}

TEST_CASE("zero margins break toward maximal consumption") {
  BlockResponse r = best_response_block(35.0, 5.0, blk(35, 5, 0, 2, 1));
  CHECK(r.x == doctest::Approx(2.0));
  CHECK(r.y == doctest::Approx(1.0));
}

TEST_CASE("closed form matches the vertex oracle on random blocks") {
  SplitMix64 rng(314159u);
  for (int trial = 0; trial < 1000; ++trial) {
    EucBlock b;
    b.benefit_price = rng.next_in(20.0, 45.0);
    b.reserve_cost_price = rng.next_in(0.0, 12.0);
    b.x_min = rng.next_unit() < 0.3 ? rng.next_in(0.0, 2.0) : 0.0;
    b.x_max = b.x_min + rng.next_in(0.0, 5.0);
    b.y_max = rng.next_in(0.0, 4.0);
    double alpha = rng.next_in(15.0, 50.0);
    double beta = rng.next_in(0.0, 15.0);
    BlockResponse r = best_response_block(alpha, beta, b);
    double got = (b.benefit_price - alpha) * r.x + (beta - b.reserve_cost_price) * r.y;
    double want = vertex_optimum(alpha, beta, b);
    CHECK(std::fabs(got - want) <= 1e-9 * (1.0 + std::fabs(want)));
    CHECK(r.x >= b.x_min + r.y - 1e-12);
    CHECK(r.x <= b.x_max + 1e-12);
    CHECK(r.y >= -1e-12);
    CHECK(r.y <= b.y_max + 1e-12);
  }
}

TEST_CASE("constructed duals satisfy the optimality system exactly") {
  SplitMix64 rng(2718u);
  PricingArea area;
  area.bus = 1;
  area.bid_ids = {0};
  for (int i = 0; i < 40; ++i) {
    EucBlock b;
    b.benefit_price = rng.next_in(20.0, 45.0);
    b.reserve_cost_price = rng.next_in(0.0, 12.0);
    b.x_min = rng.next_unit() < 0.25 ? rng.next_in(0.0, 1.0) : 0.0;
    b.x_max = b.x_min + rng.next_in(0.0, 5.0);
    b.y_max = rng.next_in(0.0, 4.0);
    area.blocks.push_back(b);
  }
  for (int trial = 0; trial < 50; ++trial) {
    double alpha = rng.next_in(15.0, 50.0);
    double beta = rng.next_in(0.0, 15.0);
    AreaResponse r = area_response(alpha, beta, area);
    KktReport rep = euc_kkt_residuals(area, alpha, beta, r);
    CHECK(rep.max_any() <= 1e-12);
  }
}

TEST_CASE("customer-side strong duality holds at the constructed point") {
  SplitMix64 rng(161803u);
  for (int trial = 0; trial < 200; ++trial) {
    EucBlock b;
    b.benefit_price = rng.next_in(20.0, 45.0);
    b.reserve_cost_price = rng.next_in(0.0, 12.0);
    b.x_min = rng.next_unit() < 0.25 ? rng.next_in(0.0, 1.0) : 0.0;
    b.x_max = b.x_min + rng.next_in(0.0, 5.0);
    b.y_max = rng.next_in(0.0, 4.0);
    double alpha = rng.next_in(15.0, 50.0);
    double beta = rng.next_in(0.0, 15.0);
    BlockResponse r = best_response_block(alpha, beta, b);
    double primal = -(b.benefit_price - alpha) * r.x - (beta - b.reserve_cost_price) * r.y;
    double dual = r.gamma_lo * b.x_min - r.gamma_hi * b.x_max - r.zeta_hi * b.y_max;
    CHECK(std::fabs(primal - dual) <= 1e-9 * (1.0 + std::fabs(primal)));
  }
}

TEST_CASE("area aggregates blockwise") {
  PricingArea area;
  area.bus = 1;
  area.bid_ids = {0};
  area.blocks = {blk(36, 5, 0, 1, 0.5), blk(38, 6, 0, 2, 1)};

  SUBCASE("prices below every benefit, above every cost") {
    AreaResponse r = area_response(30.0, 8.0, area);
    CHECK(r.x[0] == doctest::Approx(1.0));
    CHECK(r.x[1] == doctest::Approx(2.0));
    CHECK(r.y[0] == doctest::Approx(0.5));
    CHECK(r.y[1] == doctest::Approx(1.0));
    CHECK(r.total_energy() == doctest::Approx(3.0));
  }
  SUBCASE("null participation") {
    AreaResponse r = area_response(50.0, 2.0, area);
    CHECK(r.total_energy() == doctest::Approx(0.0));
    CHECK(r.total_reserve() == doctest::Approx(0.0));
    CHECK(r.objective == doctest::Approx(0.0));
  }
}

TEST_CASE("area demand is non-increasing in the energy price") {
  Case c = generate_case(GenSpec::ieee9_smallsys(), 21u);
  const PricingArea& area = c.areas[0];
  double prev = 1e300;
  for (double alpha = 30.0; alpha <= 40.0; alpha += 0.25) {
    AreaResponse r = area_response(alpha, 5.0, area);
    CHECK(r.total_energy() <= prev + 1e-9);
    prev = r.total_energy();
  }
}

TEST_CASE("alpha breakpoints are the distinct benefit prices plus caps") {
  PricingArea area;
  area.blocks = {blk(35, 5, 0, 1, 0), blk(36, 5, 0, 1, 0), blk(36, 6, 0, 1, 0)};
  PriceCaps caps;
  auto bp = alpha_breakpoints(area, caps);
  CHECK(bp == std::vector<double>{0.0, 35.0, 36.0, 100.0});
}

TEST_CASE("empty area leaves only the caps") {
  PricingArea area;
  PriceCaps caps;
  auto bp = alpha_breakpoints(area, caps);
  CHECK(bp == std::vector<double>{0.0, 100.0});
}

TEST_CASE("small-system area breakpoints live inside the draw range plus caps") {
  Case c = generate_case(GenSpec::ieee9_smallsys(), 9u);
  auto bp = alpha_breakpoints(c.areas[0], c.caps);
  for (double v : bp) {
    bool in_range = v >= 34.0 && v <= 36.0;
    bool is_cap = v == 0.0 || v == 100.0;
    CHECK((in_range || is_cap));
  }
}

TEST_CASE("beta breakpoints include the coupled switch points") {
  PricingArea area;
  area.blocks = {blk(35, 5, 0, 1, 0.5)};
  PriceCaps caps;
  auto bp = beta_breakpoints(area, 36.0, caps);
  // d = 5 and d + (alpha - c) = 6, plus caps.
  CHECK(bp == std::vector<double>{0.0, 5.0, 6.0, 50.0});
}
