#pragma once

// Shared builders for small market instances used by the unit and
// acceptance suites.

#include <cstdint>

#include "trimarket/rng.hpp"
#include "trimarket/types.hpp"

namespace trimarket::testsupport {

struct TinyOptions {
  bool with_reserve = false;
  bool two_bus = false;
  bool congested = false;
  int blocks = 2;
  bool rival = false;
};

/// Seeded one/two-bus instance with a single strategic area. Without reserve
/// and with at most two blocks the joint model stays at or below ten
/// binaries, small enough for exhaustive enumeration.
inline Case tiny_case(std::uint64_t seed, const TinyOptions& to = {}) {
  SplitMix64 rng(seed * 2654435761u + 17u);
  Case c;
  int nb = to.two_bus ? 2 : 1;
  c.buses.resize(static_cast<std::size_t>(nb));
  for (int i = 0; i < nb; ++i) c.buses[static_cast<std::size_t>(i)].id = i + 1;
  c.slack_bus = 1;
  if (to.two_bus) {
    Line ln;
    ln.id = 1;
    ln.from_bus = 1;
    ln.to_bus = 2;
    ln.reactance = 0.1;
    ln.flow_limit = to.congested ? rng.next_in(8.0, 20.0) : 500.0;
    c.lines.push_back(ln);
  }

  GenOffer g;
  g.bus = 1;
  g.energy_price = rng.next_in(8.0, 12.0);
  g.reserve_price = rng.next_in(1.0, 3.0);
  g.p_min = 0.0;
  g.p_max = rng.next_in(60.0, 150.0);
  g.r_max = to.with_reserve ? rng.next_in(10.0, 30.0) : 0.0;
  c.gen_offers.push_back(g);

  int area_bus = to.two_bus ? 2 : 1;
  LseBid b;
  b.bus = area_bus;
  b.strategic = true;
  b.p_min = 0.0;
  b.p_max = rng.next_in(25.0, 60.0);
  b.r_max = to.with_reserve ? rng.next_in(5.0, 15.0) : 0.0;
  c.lse_bids.push_back(b);
  if (to.rival) {
    LseBid r;
    r.bus = 1;
    r.strategic = false;
    r.energy_price = rng.next_in(9.0, 14.0);
    r.reserve_price = rng.next_in(2.0, 5.0);
    r.p_min = 0.0;
    r.p_max = rng.next_in(10.0, 30.0);
    r.r_max = to.with_reserve ? rng.next_in(3.0, 10.0) : 0.0;
    c.lse_bids.push_back(r);
  }

  PricingArea area;
  area.bus = area_bus;
  area.bid_ids = {0};
  double x_total = 0.0, y_total = 0.0;
  for (int i = 0; i < to.blocks; ++i) {
    EucBlock blk;
    blk.euc = 0;
    blk.benefit_price = rng.next_in(15.0, 25.0);
    blk.reserve_cost_price = rng.next_in(2.0, 6.0);
    blk.x_min = 0.0;
    blk.x_max = rng.next_in(8.0, 30.0);
    blk.y_max = to.with_reserve ? rng.next_in(4.0, 12.0) : 0.0;
    x_total += blk.x_max;
    y_total += blk.y_max;
    area.blocks.push_back(blk);
  }
  // Bid bounds aggregate the customers' capability (keeps every posted
  // price balance-feasible).
  c.lse_bids[0].p_max = x_total;
  c.lse_bids[0].r_max = y_total;
  c.areas.push_back(area);

  c.caps = PriceCaps{0.0, 60.0, 0.0, 30.0};
  c.reserve_req = to.with_reserve ? rng.next_in(3.0, 9.0) : 0.0;
  return c;
}

}  // namespace trimarket::testsupport
