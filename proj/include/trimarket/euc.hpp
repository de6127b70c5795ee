#pragma once

#include <algorithm>
#include <cmath>
#include <set>
#include <vector>

#include "trimarket/types.hpp"

namespace trimarket {

/// Per-block optimum of one customer block under posted prices, together
/// with the duals of the block's two-variable LP.
struct BlockResponse {
  double x = 0.0;
  double y = 0.0;
  double gamma_lo = 0.0, gamma_hi = 0.0;  // coupling x - y >= x_min, x <= x_max
  double zeta_lo = 0.0, zeta_hi = 0.0;    // 0 <= y <= y_max
};

/// Area-level response: flattened block quantities, duals, and the customers'
/// aggregate surplus.
struct AreaResponse {
  std::vector<double> x, y;
  std::vector<double> gamma_lo, gamma_hi, zeta_lo, zeta_hi;
  double objective = 0.0;

  double total_energy() const {
    double s = 0.0;
    for (double v : x) s += v;
    return s;
  }
  double total_reserve() const {
    double s = 0.0;
    for (double v : y) s += v;
    return s;
  }
};

/// Maximizes (c - alpha) x + (beta - d) y over the block polytope
///   x_min + y <= x <= x_max, 0 <= y <= y_max.
/// Zero margins break toward maximal consumption: x = x_max when c = alpha,
/// and maximal y when the relevant margin is zero.
///
/// Duals are built from the active set so stationarity, dual feasibility and
/// complementary slackness hold exactly; which split applies depends on
/// whether the coupling or the reserve cap limits y.
inline BlockResponse best_response_block(double alpha, double beta, const EucBlock& blk) {
  const double e = blk.benefit_price - alpha;        // energy margin
  const double m = beta - blk.reserve_cost_price;    // reserve margin
  const double span = blk.x_max - blk.x_min;
  const double cap = std::min(blk.y_max, span);

  BlockResponse r;
  if (e >= 0.0) {
    r.x = blk.x_max;
    if (m >= 0.0) {
      r.y = cap;
      if (blk.y_max <= span) {
        // reserve cap binds (or both at equality)
        r.gamma_lo = 0.0;
        r.gamma_hi = e;
        r.zeta_lo = 0.0;
        r.zeta_hi = m;
      } else {
        // coupling binds y
        r.gamma_lo = m;
        r.gamma_hi = e + m;
        r.zeta_lo = 0.0;
        r.zeta_hi = 0.0;
      }
    } else {
      r.y = 0.0;
      r.gamma_lo = 0.0;
      r.gamma_hi = e;
      r.zeta_lo = -m;
      r.zeta_hi = 0.0;
    }
  } else {
    const double s = e + m;  // combined margin of reserve-backed consumption
    if (s >= 0.0) {
      r.y = cap;
      r.x = blk.x_min + r.y;
      if (blk.y_max <= span) {
        r.gamma_lo = -e;
        r.gamma_hi = 0.0;
        r.zeta_lo = 0.0;
        r.zeta_hi = s;
      } else {
        r.gamma_lo = m;
        r.gamma_hi = s;
        r.zeta_lo = 0.0;
        r.zeta_hi = 0.0;
      }
    } else {
      r.y = 0.0;
      r.x = blk.x_min;
      r.gamma_lo = -e;
      r.gamma_hi = 0.0;
      r.zeta_lo = -s;
      r.zeta_hi = 0.0;
    }
  }
  return r;
}

/// Solves every block of the area independently and aggregates.
inline AreaResponse area_response(double alpha, double beta, const PricingArea& area) {
  AreaResponse out;
  for (const EucBlock& blk : area.blocks) {
    BlockResponse r = best_response_block(alpha, beta, blk);
    out.x.push_back(r.x);
    out.y.push_back(r.y);
    out.gamma_lo.push_back(r.gamma_lo);
    out.gamma_hi.push_back(r.gamma_hi);
    out.zeta_lo.push_back(r.zeta_lo);
    out.zeta_hi.push_back(r.zeta_hi);
    out.objective += (blk.benefit_price - alpha) * r.x + (beta - blk.reserve_cost_price) * r.y;
  }
  return out;
}

/// Candidate energy prices at which an area's best response changes: the
/// distinct benefit prices plus the caps.
inline std::vector<double> alpha_breakpoints(const PricingArea& area, const PriceCaps& caps) {
  std::set<double> s{caps.alpha_min, caps.alpha_max};
  for (const EucBlock& blk : area.blocks) s.insert(blk.benefit_price);
  return std::vector<double>(s.begin(), s.end());
}

/// Candidate reserve prices at a given energy price: distinct reserve cost
/// prices, the coupled switch points d + (alpha - c) of blocks priced out of
/// energy, and the caps.
inline std::vector<double> beta_breakpoints(const PricingArea& area, double alpha,
                                            const PriceCaps& caps) {
  std::set<double> s{caps.beta_min, caps.beta_max};
  for (const EucBlock& blk : area.blocks) {
    s.insert(blk.reserve_cost_price);
    if (blk.benefit_price < alpha)
      s.insert(blk.reserve_cost_price + (alpha - blk.benefit_price));
  }
  return std::vector<double>(s.begin(), s.end());
}

}  // namespace trimarket
