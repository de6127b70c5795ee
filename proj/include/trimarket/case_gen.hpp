#pragma once

#include <cstdint>
#include <stdexcept>
#include <string>
#include <vector>

#include "json.hpp"
#include "trimarket/case_io.hpp"
#include "trimarket/rng.hpp"
#include "trimarket/types.hpp"

namespace trimarket {

struct Range {
  double lo = 0.0;
  double hi = 0.0;
};

/// Generation parameters for seeded random instances. Draw order is fixed and
/// documented so instances reproduce bit-for-bit: generators (energy price,
/// reserve price), rival bids (energy price, reserve price), then per area,
/// per customer, per block: benefit price, reserve cost price, x_max, y_max.
/// Block bounds are drawn per block from scale_range / n_eucs times the
/// area's wholesale bid size.
struct GenSpec {
  struct GenEntry {
    int bus = 0;
    Range a_range, b_range;
    double p_min = 0.0, p_max = 0.0, r_max = 0.0;
  };
  struct RivalEntry {
    int bus = 0;
    Range a_range, b_range;
    double p_min = 0.0, p_max = 0.0, r_max = 0.0;
  };
  struct AreaEntry {
    int bus = 0;
    int n_eucs = 10;
    int blocks_per_euc = 3;
    Range c_range, d_range;
    Range x_scale{0.85, 1.15};
    Range y_scale{0.85, 1.15};
    double bid_p_min = 0.0, bid_p_max = 0.0, bid_r_max = 0.0;
  };

  int buses = 0;
  int slack_bus = 1;
  std::vector<Line> lines;
  std::vector<GenEntry> gens;
  std::vector<AreaEntry> areas;
  std::vector<RivalEntry> rivals;
  PriceCaps caps;
  double reserve_req = 0.0;
  BigMPolicy bigm;

  /// The 9-bus small system: generators at buses 1-3, strategic pricing areas
  /// at 6, 7 and 8, rival load-serving entities at 4, 5 and 9, ample line
  /// capacity, 10 customers of 3 blocks per area.
  static GenSpec ieee9_smallsys();

  /// Desk-scale variant of the 9-bus system: 2 customers of 2 blocks per
  /// area, everything else as in ieee9_smallsys.
  static GenSpec ieee9_desk();

  /// Desk-scale 9-bus system with line capacities lowered until the
  /// generator step-up lines bind.
  static GenSpec ieee9_desk_congested();
};

inline GenSpec GenSpec::ieee9_smallsys() {
  GenSpec s;
  s.buses = 9;
  s.slack_bus = 1;
  // Ample capacity: no line can congest (largest machine is 300 MW).
  const double cap = 600.0;
  auto line = [&](int id, int f, int t, double x) {
    Line l;
    l.id = id;
    l.from_bus = f;
    l.to_bus = t;
    l.reactance = x;
    l.flow_limit = cap;
    return l;
  };
  s.lines = {line(1, 1, 4, 0.0576), line(2, 2, 7, 0.0625), line(3, 3, 9, 0.0586),
             line(4, 4, 5, 0.0850), line(5, 4, 6, 0.0920), line(6, 5, 7, 0.1610),
             line(7, 6, 9, 0.1700), line(8, 7, 8, 0.0720), line(9, 8, 9, 0.1008)};
  s.gens = {{1, {20.0, 22.0}, {3.0, 5.0}, 0.0, 250.0, 50.0},
            {2, {21.0, 23.0}, {4.0, 6.0}, 0.0, 300.0, 50.0},
            {3, {22.0, 24.0}, {5.0, 7.0}, 0.0, 270.0, 50.0}};
  s.areas = {{6, 10, 3, {34.0, 36.0}, {4.0, 6.0}, {0.85, 1.15}, {0.85, 1.15}, 0.0, 90.0, 30.0},
             {7, 10, 3, {35.0, 37.0}, {5.0, 7.0}, {0.85, 1.15}, {0.85, 1.15}, 0.0, 90.0, 30.0},
             {8, 10, 3, {36.0, 38.0}, {6.0, 8.0}, {0.85, 1.15}, {0.85, 1.15}, 0.0, 90.0, 30.0}};
  s.rivals = {{4, {20.0, 22.0}, {4.0, 6.0}, 0.0, 80.0, 25.0},
              {5, {21.0, 23.0}, {5.0, 7.0}, 0.0, 80.0, 25.0},
              {9, {22.0, 24.0}, {6.0, 8.0}, 0.0, 80.0, 25.0}};
  s.caps = PriceCaps{0.0, 100.0, 0.0, 50.0};
  s.reserve_req = 60.0;
  return s;
}

inline GenSpec GenSpec::ieee9_desk() {
  GenSpec s = ieee9_smallsys();
  for (auto& a : s.areas) {
    a.n_eucs = 2;
    a.blocks_per_euc = 2;
  }
  return s;
}

inline GenSpec GenSpec::ieee9_desk_congested() {
  GenSpec s = ieee9_desk();
  for (auto& l : s.lines) l.flow_limit = 130.0;
  return s;
}

/// Deterministic instance sampling. Throws on an empty range (lo > hi).
inline Case generate_case(const GenSpec& spec, std::uint64_t seed) {
  auto draw = [](SplitMix64& rng, const Range& r, const std::string& what) {
    if (r.lo > r.hi) throw std::runtime_error("generate_case: empty range for " + what);
    return rng.next_in(r.lo, r.hi);
  };

  SplitMix64 rng(seed);
  Case c;
  c.buses.resize(static_cast<std::size_t>(spec.buses));
  for (int i = 0; i < spec.buses; ++i) c.buses[static_cast<std::size_t>(i)].id = i + 1;
  c.slack_bus = spec.slack_bus;
  c.lines = spec.lines;
  c.caps = spec.caps;
  c.reserve_req = spec.reserve_req;
  c.bigm = spec.bigm;

  for (const auto& g : spec.gens) {
    GenOffer o;
    o.bus = g.bus;
    o.energy_price = draw(rng, g.a_range, "gen energy price");
    o.reserve_price = draw(rng, g.b_range, "gen reserve price");
    o.p_min = g.p_min;
    o.p_max = g.p_max;
    o.r_max = g.r_max;
    c.gen_offers.push_back(o);
  }

  // Strategic bids first (one per area, prices are placeholders), rivals after.
  for (const auto& a : spec.areas) {
    LseBid b;
    b.bus = a.bus;
    b.strategic = true;
    b.p_min = a.bid_p_min;
    b.p_max = a.bid_p_max;
    b.r_max = a.bid_r_max;
    c.lse_bids.push_back(b);
  }
  for (const auto& r : spec.rivals) {
    LseBid b;
    b.bus = r.bus;
    b.strategic = false;
    b.energy_price = draw(rng, r.a_range, "rival energy price");
    b.reserve_price = draw(rng, r.b_range, "rival reserve price");
    b.p_min = r.p_min;
    b.p_max = r.p_max;
    b.r_max = r.r_max;
    c.lse_bids.push_back(b);
  }

  for (std::size_t k = 0; k < spec.areas.size(); ++k) {
    const auto& a = spec.areas[k];
    PricingArea area;
    area.bus = a.bus;
    area.bid_ids = {static_cast<int>(k)};
    const double ck = static_cast<double>(a.n_eucs);
    double x_total = 0.0, y_total = 0.0;
    for (int e = 0; e < a.n_eucs; ++e) {
      for (int bi = 0; bi < a.blocks_per_euc; ++bi) {
        EucBlock blk;
        blk.euc = e;
        blk.benefit_price = draw(rng, a.c_range, "benefit price");
        blk.reserve_cost_price = draw(rng, a.d_range, "reserve cost price");
        blk.x_min = 0.0;
        blk.x_max = draw(rng, a.x_scale, "x scale") / ck * a.bid_p_max;
        blk.y_max = draw(rng, a.y_scale, "y scale") / ck * a.bid_r_max;
        x_total += blk.x_max;
        y_total += blk.y_max;
        area.blocks.push_back(blk);
      }
    }
    // The area's wholesale bid aggregates its customers: its quantity bounds
    // are the drawn block totals, so the balance between wholesale purchases
    // and customer demand stays feasible at every posted price.
    c.lse_bids[k].p_max = x_total;
    c.lse_bids[k].r_max = y_total;
    c.areas.push_back(std::move(area));
  }
  return c;
}

// --- generation spec files -------------------------------------------------

namespace genspec_detail {

inline Range parse_range(const nlohmann::json& v, const std::string& path) {
  if (!v.is_array() || v.size() != 2)
    throw CaseFormatError(path + ": expected [lo, hi]");
  return Range{v[0].get<double>(), v[1].get<double>()};
}

}  // namespace genspec_detail

/// Parses a generation-spec document. The topology is given inline under
/// "topology" with the same shape as a case file's "network" section.
inline GenSpec load_genspec(const std::string& text) {
  using nlohmann::json;
  using genspec_detail::parse_range;
  json doc;
  try {
    doc = json::parse(text);
  } catch (const json::parse_error& e) {
    throw CaseFormatError(std::string("parse error: ") + e.what());
  }

  GenSpec s;
  const json& topo = doc.at("topology");
  s.buses = topo.at("buses").get<int>();
  s.slack_bus = topo.value("slack_bus", 1);
  int id = 1;
  for (const json& lj : topo.at("lines")) {
    Line ln;
    ln.id = id++;
    ln.from_bus = lj.at("from").get<int>();
    ln.to_bus = lj.at("to").get<int>();
    ln.reactance = lj.at("reactance").get<double>();
    ln.flow_limit = lj.at("flow_limit").get<double>();
    s.lines.push_back(ln);
  }
  for (const json& gj : doc.at("gens")) {
    GenSpec::GenEntry g;
    g.bus = gj.at("bus").get<int>();
    g.a_range = parse_range(gj.at("a_range"), "gens.a_range");
    g.b_range = parse_range(gj.at("b_range"), "gens.b_range");
    g.p_min = gj.value("p_min", 0.0);
    g.p_max = gj.at("p_max").get<double>();
    g.r_max = gj.value("r_max", 0.0);
    s.gens.push_back(g);
  }
  for (const json& aj : doc.at("areas")) {
    GenSpec::AreaEntry a;
    a.bus = aj.at("bus").get<int>();
    a.n_eucs = aj.at("n_eucs").get<int>();
    a.blocks_per_euc = aj.at("blocks_per_euc").get<int>();
    a.c_range = parse_range(aj.at("c_range"), "areas.c_range");
    a.d_range = parse_range(aj.at("d_range"), "areas.d_range");
    if (aj.contains("x_scale")) a.x_scale = parse_range(aj.at("x_scale"), "areas.x_scale");
    if (aj.contains("y_scale")) a.y_scale = parse_range(aj.at("y_scale"), "areas.y_scale");
    a.bid_p_min = aj.value("bid_p_min", 0.0);
    a.bid_p_max = aj.at("bid_p_max").get<double>();
    a.bid_r_max = aj.value("bid_r_max", 0.0);
    s.areas.push_back(a);
  }
  if (doc.contains("rivals"))
    for (const json& rj : doc.at("rivals")) {
      GenSpec::RivalEntry r;
      r.bus = rj.at("bus").get<int>();
      r.a_range = parse_range(rj.at("a_range"), "rivals.a_range");
      r.b_range = parse_range(rj.at("b_range"), "rivals.b_range");
      r.p_min = rj.value("p_min", 0.0);
      r.p_max = rj.at("p_max").get<double>();
      r.r_max = rj.value("r_max", 0.0);
      s.rivals.push_back(r);
    }
  if (doc.contains("caps")) {
    const json& caps = doc.at("caps");
    s.caps.alpha_min = caps.value("alpha_min", 0.0);
    s.caps.alpha_max = caps.value("alpha_max", 100.0);
    s.caps.beta_min = caps.value("beta_min", 0.0);
    s.caps.beta_max = caps.value("beta_max", 50.0);
  }
  s.reserve_req = doc.value("reserve_req", 0.0);
  return s;
}

}  // namespace trimarket
