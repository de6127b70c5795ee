#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <string>
#include <vector>

#include "trimarket/linalg.hpp"

namespace trimarket {

// ---------------------------------------------------------------------------
// Domain types for the tri-layer market model.
//
// A Case describes one wholesale market instance: a DC network, generator
// offers, load-serving-entity bids (some of them strategic, i.e. their prices
// are decision variables of the joint problem), and the retail side: pricing
// areas whose end-user customers respond to posted energy/reserve prices with
// piecewise-linear benefit/cost blocks.
//
// All types are immutable-by-convention value types; operations never mutate
// a Case in place.
// ---------------------------------------------------------------------------

struct Bus {
  int id = 0;  // 1-based, contiguous
};

struct Line {
  int id = 0;  // 1-based, contiguous
  int from_bus = 0;
  int to_bus = 0;
  double reactance = 0.0;   // per unit, > 0
  double flow_limit = 0.0;  // MW, >= 0; flow oriented from_bus -> to_bus
};

struct GenOffer {
  int bus = 0;
  double energy_price = 0.0;   // $/MWh
  double reserve_price = 0.0;  // $/MW
  double p_min = 0.0;          // MW
  double p_max = 0.0;          // MW
  double r_max = 0.0;          // MW
};

struct LseBid {
  int bus = 0;
  double energy_price = 0.0;   // $/MWh, decision variable when strategic
  double reserve_price = 0.0;  // $/MW, decision variable when strategic
  double p_min = 0.0;          // MW
  double p_max = 0.0;          // MW
  double r_max = 0.0;          // MW
  bool strategic = false;
};

/// One block of an end-user customer's piecewise-linear benefit/cost curves.
struct EucBlock {
  double benefit_price = 0.0;       // $/MWh, marginal energy benefit
  double reserve_cost_price = 0.0;  // $/MW, marginal reserve provision cost
  double x_min = 0.0;               // MW
  double x_max = 0.0;               // MW
  double y_max = 0.0;               // MW
  int euc = 0;                      // owning customer within the area (metadata)
};

/// Pricing area: the customers at one bus that see the LSE's posted prices.
/// Blocks from all customers in the area are stored flattened; the per-EUC
/// grouping lives only in EucBlock::euc.
struct PricingArea {
  int bus = 0;
  std::vector<int> bid_ids;  // 0-based indices into Case::lse_bids, all strategic
  std::vector<EucBlock> blocks;
};

struct PriceCaps {
  double alpha_min = 0.0;
  double alpha_max = 100.0;
  double beta_min = 0.0;
  double beta_max = 50.0;
};

/// Big-M / bound policy for the single-level reformulation. Values <= 0 mean
/// "derive from case data"; explicit values override. Dual groups:
/// flow, reserve, gen_box, gen_reserve, bid_box, bid_reserve, euc.
struct BigMPolicy {
  double dual_default = -1.0;
  std::map<std::string, double> dual_group;
  double price_var_bound = -1.0;  // bound on strategic bid prices |a^d|, |b^d|
  double lambda_bound = -1.0;     // bound on the balance dual

  double group_value(const std::string& group) const {
    auto it = dual_group.find(group);
    if (it != dual_group.end() && it->second > 0.0) return it->second;
    return dual_default;
  }
};

struct Case {
  std::vector<Bus> buses;
  std::vector<Line> lines;
  int slack_bus = 1;
  std::vector<double> loss_factors;        // empty => all zeros
  std::optional<Matrix> isf_override;      // L x N, overrides computed ISF
  std::vector<GenOffer> gen_offers;
  std::vector<LseBid> lse_bids;
  std::vector<PricingArea> areas;
  PriceCaps caps;
  double reserve_req = 0.0;  // MW
  BigMPolicy bigm;

  int n_buses() const { return static_cast<int>(buses.size()); }
  int n_lines() const { return static_cast<int>(lines.size()); }
  int n_gens() const { return static_cast<int>(gen_offers.size()); }
  int n_bids() const { return static_cast<int>(lse_bids.size()); }
  int n_areas() const { return static_cast<int>(areas.size()); }

  int total_blocks() const {
    int n = 0;
    for (const auto& a : areas) n += static_cast<int>(a.blocks.size());
    return n;
  }

  std::vector<int> strategic_bid_ids() const {
    std::vector<int> ids;
    for (int j = 0; j < n_bids(); ++j)
      if (lse_bids[j].strategic) ids.push_back(j);
    return ids;
  }

  double loss_factor(int bus) const {
    if (loss_factors.empty()) return 0.0;
    return loss_factors[static_cast<std::size_t>(bus - 1)];
  }
};

namespace detail {
inline bool finite(double v) { return std::isfinite(v); }
}  // namespace detail

/// Checks every type invariant. Returns an empty list iff the case is valid;
/// otherwise one human-readable diagnostic per violation.
inline std::vector<std::string> validate_case(const Case& c) {
  std::vector<std::string> out;
  auto bad = [&out](const std::string& msg) { out.push_back(msg); };
  const int n = c.n_buses();

  if (n < 1) bad("network: at least one bus required");
  for (int i = 0; i < n; ++i)
    if (c.buses[static_cast<std::size_t>(i)].id != i + 1)
      bad("network: bus ids must be contiguous from 1");
  if (c.slack_bus < 1 || c.slack_bus > n) bad("network: slack_bus out of range");

  for (std::size_t l = 0; l < c.lines.size(); ++l) {
    const Line& ln = c.lines[l];
    const std::string tag = "lines[" + std::to_string(l) + "]";
    if (ln.from_bus < 1 || ln.from_bus > n || ln.to_bus < 1 || ln.to_bus > n)
      bad(tag + ": endpoint bus out of range");
    if (ln.from_bus == ln.to_bus) bad(tag + ": from_bus equals to_bus");
    if (!(ln.reactance > 0.0)) bad(tag + ": reactance must be > 0");
    if (ln.flow_limit < 0.0) bad(tag + ": flow_limit must be >= 0");
  }

  if (!c.loss_factors.empty()) {
    if (static_cast<int>(c.loss_factors.size()) != n)
      bad("loss_factors: length must equal bus count");
    for (std::size_t i = 0; i < c.loss_factors.size(); ++i)
      if (!(c.loss_factors[i] >= 0.0) || !(c.loss_factors[i] < 1.0))
        bad("loss_factors[" + std::to_string(i) + "]: loss factor out of range [0, 1)");
  }

  if (c.isf_override) {
    if (c.isf_override->rows() != c.lines.size() ||
        c.isf_override->cols() != static_cast<std::size_t>(n))
      bad("network.isf: override shape must be L x N");
  }

  for (std::size_t g = 0; g < c.gen_offers.size(); ++g) {
    const GenOffer& o = c.gen_offers[g];
    const std::string tag = "gens[" + std::to_string(g) + "]";
    if (o.bus < 1 || o.bus > n) bad(tag + ": bus out of range");
    if (!(o.p_min >= 0.0) || !(o.p_max >= o.p_min)) bad(tag + ": requires 0 <= p_min <= p_max");
    if (o.r_max < 0.0) bad(tag + ": r_max must be >= 0");
    if (!detail::finite(o.energy_price) || !detail::finite(o.reserve_price))
      bad(tag + ": prices must be finite");
  }

  for (std::size_t j = 0; j < c.lse_bids.size(); ++j) {
    const LseBid& b = c.lse_bids[j];
    const std::string tag = "bids[" + std::to_string(j) + "]";
    if (b.bus < 1 || b.bus > n) bad(tag + ": bus out of range");
    if (!(b.p_min >= 0.0) || !(b.p_max >= b.p_min)) bad(tag + ": requires 0 <= p_min <= p_max");
    if (b.r_max < 0.0) bad(tag + ": r_max must be >= 0");
    if (!detail::finite(b.energy_price) || !detail::finite(b.reserve_price))
      bad(tag + ": prices must be finite");
  }

  // Strategic bids must map to exactly one area located at their bus.
  std::vector<int> area_of_bid(c.lse_bids.size(), -1);
  for (std::size_t k = 0; k < c.areas.size(); ++k) {
    const PricingArea& a = c.areas[k];
    const std::string tag = "areas[" + std::to_string(k) + "]";
    if (a.bus < 1 || a.bus > n) bad(tag + ": bus out of range");
    if (a.bid_ids.empty()) bad(tag + ": bid_ids must be non-empty");
    for (int id : a.bid_ids) {
      if (id < 0 || id >= c.n_bids()) {
        bad(tag + ": bid id " + std::to_string(id) + " out of range");
        continue;
      }
      if (!c.lse_bids[static_cast<std::size_t>(id)].strategic)
        bad(tag + ": bid " + std::to_string(id) + " is not strategic");
      if (c.lse_bids[static_cast<std::size_t>(id)].bus != a.bus)
        bad(tag + ": bid " + std::to_string(id) + " is not located at the area bus");
      if (area_of_bid[static_cast<std::size_t>(id)] >= 0)
        bad(tag + ": bid " + std::to_string(id) + " already assigned to area " +
            std::to_string(area_of_bid[static_cast<std::size_t>(id)]));
      area_of_bid[static_cast<std::size_t>(id)] = static_cast<int>(k);
    }
    for (std::size_t bi = 0; bi < a.blocks.size(); ++bi) {
      const EucBlock& blk = a.blocks[bi];
      const std::string btag = tag + ".blocks[" + std::to_string(bi) + "]";
      if (!(blk.x_min >= 0.0) || !(blk.x_max >= blk.x_min))
        bad(btag + ": requires 0 <= x_min <= x_max");
      if (blk.y_max < 0.0) bad(btag + ": y_max must be >= 0");
      if (!detail::finite(blk.benefit_price) || !detail::finite(blk.reserve_cost_price))
        bad(btag + ": prices must be finite");
    }
  }
  for (std::size_t j = 0; j < c.lse_bids.size(); ++j)
    if (c.lse_bids[j].strategic && area_of_bid[j] < 0)
      bad("bids[" + std::to_string(j) + "]: strategic bid not assigned to any pricing area");

  if (!(c.caps.alpha_min <= c.caps.alpha_max)) bad("caps: alpha_min > alpha_max");
  if (!(c.caps.beta_min <= c.caps.beta_max)) bad("caps: beta_min > beta_max");
  if (c.reserve_req < 0.0) bad("reserve_req must be >= 0");

  return out;
}

}  // namespace trimarket
