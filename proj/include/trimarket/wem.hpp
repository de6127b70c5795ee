#pragma once

#include <stdexcept>
#include <string>
#include <vector>

#include "trimarket/lp.hpp"
#include "trimarket/network.hpp"
#include "trimarket/simplex.hpp"
#include "trimarket/types.hpp"

namespace trimarket {

/// Concrete bid prices for every LSE bid (strategic ones included).
struct BidPrices {
  std::vector<double> energy;   // a^d, one per bid
  std::vector<double> reserve;  // b^d, one per bid

  static BidPrices from_case(const Case& c) {
    BidPrices b;
    for (const LseBid& bid : c.lse_bids) {
      b.energy.push_back(bid.energy_price);
      b.reserve.push_back(bid.reserve_price);
    }
    return b;
  }
};

/// One solved wholesale clearing: primal quantities, every dual group of the
/// clearing LP, locational prices and the reserve price. `objective` is the
/// minimization objective (generation plus reserve cost minus bid surplus);
/// social welfare is its negation.
struct WemClearing {
  std::vector<double> p_g, r_g;  // per offer, MW
  std::vector<double> p_d, r_d;  // per bid, MW
  double lambda = 0.0;
  std::vector<double> mu_lo, mu_hi;  // per line
  double nu = 0.0;
  std::vector<double> rho_g_lo, rho_g_hi, eta_g_lo, eta_g_hi;  // per offer
  std::vector<double> rho_d_lo, rho_d_hi, eta_d_lo, eta_d_hi;  // per bid
  std::vector<double> lmp;  // per bus
  double objective = 0.0;

  double welfare() const { return -objective; }
};

namespace wem_detail {

// Variable layout of the clearing LP.
struct Layout {
  int g = 0, d = 0;
  int pg(int i) const { return i; }
  int pd(int j) const { return g + j; }
  int rg(int i) const { return g + d + i; }
  int rd(int j) const { return 2 * g + d + j; }
  int count() const { return 2 * (g + d); }
};

}  // namespace wem_detail

/// The co-optimized energy/reserve clearing LP: minimize
///   a^g.p^g + b^g.r^g - a^d.p^d + b^d.r^d
/// subject to the lossy balance, two-sided line flows, the reserve
/// requirement and the coupled capacity boxes. Box lower/upper sides that
/// involve a single variable are encoded as variable bounds; coupled sides
/// are explicit rows.
inline Lp build_wem_lp(const Case& c, const BidPrices& bids) {
  if (static_cast<int>(bids.energy.size()) != c.n_bids() ||
      static_cast<int>(bids.reserve.size()) != c.n_bids())
    throw std::invalid_argument("build_wem_lp: bid price vectors must cover every bid");

  const int g = c.n_gens(), d = c.n_bids(), l = c.n_lines();
  wem_detail::Layout ix{g, d};
  IsfMatrix isf = effective_isf(c);
  LossFactors lf = loss_factors(c);

  Lp lp;
  lp.maximize = false;
  for (int i = 0; i < g; ++i)
    lp.add_var("pg" + std::to_string(i), c.gen_offers[static_cast<std::size_t>(i)].p_min, kInf,
               c.gen_offers[static_cast<std::size_t>(i)].energy_price);
  for (int j = 0; j < d; ++j)
    lp.add_var("pd" + std::to_string(j), -kInf, c.lse_bids[static_cast<std::size_t>(j)].p_max,
               -bids.energy[static_cast<std::size_t>(j)]);
  for (int i = 0; i < g; ++i)
    lp.add_var("rg" + std::to_string(i), 0.0, c.gen_offers[static_cast<std::size_t>(i)].r_max,
               c.gen_offers[static_cast<std::size_t>(i)].reserve_price);
  for (int j = 0; j < d; ++j)
    lp.add_var("rd" + std::to_string(j), 0.0, c.lse_bids[static_cast<std::size_t>(j)].r_max,
               bids.reserve[static_cast<std::size_t>(j)]);

  // (1a) lossy power balance
  {
    Lp::Row r;
    r.name = "balance";
    for (int i = 0; i < g; ++i) {
      r.idx.push_back(ix.pg(i));
      r.val.push_back(1.0 - lf.values[static_cast<std::size_t>(
                                c.gen_offers[static_cast<std::size_t>(i)].bus - 1)]);
    }
    for (int j = 0; j < d; ++j) {
      r.idx.push_back(ix.pd(j));
      r.val.push_back(-(1.0 - lf.values[static_cast<std::size_t>(
                                  c.lse_bids[static_cast<std::size_t>(j)].bus - 1)]));
    }
    r.lo = r.hi = 0.0;
    lp.add_row(std::move(r));
  }

  // (1b) line flows, one row per side so each carries its own dual
  for (int ell = 0; ell < l; ++ell) {
    Lp::Row lorow, hirow;
    lorow.name = "flow_lo" + std::to_string(ell);
    hirow.name = "flow_hi" + std::to_string(ell);
    for (int i = 0; i < g; ++i) {
      double psi = isf.values(static_cast<std::size_t>(ell),
                              static_cast<std::size_t>(c.gen_offers[static_cast<std::size_t>(i)].bus - 1));
      if (psi == 0.0) continue;
      lorow.idx.push_back(ix.pg(i));
      lorow.val.push_back(psi);
      hirow.idx.push_back(ix.pg(i));
      hirow.val.push_back(psi);
    }
    for (int j = 0; j < d; ++j) {
      double psi = isf.values(static_cast<std::size_t>(ell),
                              static_cast<std::size_t>(c.lse_bids[static_cast<std::size_t>(j)].bus - 1));
      if (psi == 0.0) continue;
      lorow.idx.push_back(ix.pd(j));
      lorow.val.push_back(-psi);
      hirow.idx.push_back(ix.pd(j));
      hirow.val.push_back(-psi);
    }
    double fbar = c.lines[static_cast<std::size_t>(ell)].flow_limit;
    lorow.lo = -fbar;
    lorow.hi = kInf;
    hirow.lo = -kInf;
    hirow.hi = fbar;
    lp.add_row(std::move(lorow));
    lp.add_row(std::move(hirow));
  }

  // (1c) reserve requirement
  {
    Lp::Row r;
    r.name = "reserve";
    for (int i = 0; i < g; ++i) {
      r.idx.push_back(ix.rg(i));
      r.val.push_back(1.0);
    }
    for (int j = 0; j < d; ++j) {
      r.idx.push_back(ix.rd(j));
      r.val.push_back(1.0);
    }
    r.lo = c.reserve_req;
    r.hi = kInf;
    lp.add_row(std::move(r));
  }

  // (1d) upper side: p^g + r^g <= pbar^g
  for (int i = 0; i < g; ++i) {
    Lp::Row r;
    r.name = "gen_hi" + std::to_string(i);
    r.idx = {ix.pg(i), ix.rg(i)};
    r.val = {1.0, 1.0};
    r.lo = -kInf;
    r.hi = c.gen_offers[static_cast<std::size_t>(i)].p_max;
    lp.add_row(std::move(r));
  }

  // (1e) lower side: p^d - r^d >= pmin^d
  for (int j = 0; j < d; ++j) {
    Lp::Row r;
    r.name = "bid_lo" + std::to_string(j);
    r.idx = {ix.pd(j), ix.rd(j)};
    r.val = {1.0, -1.0};
    r.lo = c.lse_bids[static_cast<std::size_t>(j)].p_min;
    r.hi = kInf;
    lp.add_row(std::move(r));
  }

  return lp;
}

/// Locational marginal prices from clearing duals:
///   pi_i = lambda (1 - loss_i) + sum_l (mu_lo_l - mu_hi_l) isf(l, i).
inline std::vector<double> lmp(double lambda, const std::vector<double>& mu_lo,
                               const std::vector<double>& mu_hi,
                               const LossFactors& lf, const IsfMatrix& isf) {
  const std::size_t n = lf.values.size();
  if (mu_lo.size() != isf.values.rows() || mu_hi.size() != isf.values.rows() ||
      (isf.values.rows() > 0 && isf.values.cols() != n))
    throw std::invalid_argument("lmp: dimension mismatch");
  std::vector<double> pi(n, 0.0);
  for (std::size_t i = 0; i < n; ++i) {
    double v = lambda * (1.0 - lf.values[i]);
    for (std::size_t l = 0; l < mu_lo.size(); ++l)
      v += (mu_lo[l] - mu_hi[l]) * isf.values(l, i);
    pi[i] = v;
  }
  return pi;
}

/// Solves the clearing LP and assembles the full primal/dual clearing.
/// Throws on infeasible (unmeetable reserve or unservable demand floor) and
/// on unbounded input, which indicates a modeling error.
inline WemClearing clear_wem(const Case& c, const BidPrices& bids) {
  Lp lp = build_wem_lp(c, bids);
  LpSolution sol = solve_lp(lp);
  if (sol.status == SolveStatus::kInfeasible)
    throw std::runtime_error("clear_wem: clearing LP infeasible");
  if (sol.status == SolveStatus::kUnbounded)
    throw std::runtime_error("clear_wem: clearing LP unbounded (modeling error)");

  const int g = c.n_gens(), d = c.n_bids(), l = c.n_lines();
  wem_detail::Layout ix{g, d};
  WemClearing w;
  w.objective = sol.objective;
  for (int i = 0; i < g; ++i) w.p_g.push_back(sol.x[static_cast<std::size_t>(ix.pg(i))]);
  for (int j = 0; j < d; ++j) w.p_d.push_back(sol.x[static_cast<std::size_t>(ix.pd(j))]);
  for (int i = 0; i < g; ++i) w.r_g.push_back(sol.x[static_cast<std::size_t>(ix.rg(i))]);
  for (int j = 0; j < d; ++j) w.r_d.push_back(sol.x[static_cast<std::size_t>(ix.rd(j))]);

  auto pos = [](double v) { return v > 0.0 ? v : 0.0; };
  int row = 0;
  w.lambda = sol.row_dual[static_cast<std::size_t>(row++)];
  w.mu_lo.resize(static_cast<std::size_t>(l));
  w.mu_hi.resize(static_cast<std::size_t>(l));
  for (int ell = 0; ell < l; ++ell) {
    w.mu_lo[static_cast<std::size_t>(ell)] = pos(sol.row_dual[static_cast<std::size_t>(row++)]);
    w.mu_hi[static_cast<std::size_t>(ell)] = pos(-sol.row_dual[static_cast<std::size_t>(row++)]);
  }
  w.nu = pos(sol.row_dual[static_cast<std::size_t>(row++)]);
  for (int i = 0; i < g; ++i)
    w.rho_g_hi.push_back(pos(-sol.row_dual[static_cast<std::size_t>(row++)]));
  for (int j = 0; j < d; ++j)
    w.rho_d_lo.push_back(pos(sol.row_dual[static_cast<std::size_t>(row++)]));

  // Box-side duals come from reduced costs.
  for (int i = 0; i < g; ++i)
    w.rho_g_lo.push_back(pos(sol.reduced_cost[static_cast<std::size_t>(ix.pg(i))]));
  for (int j = 0; j < d; ++j)
    w.rho_d_hi.push_back(pos(-sol.reduced_cost[static_cast<std::size_t>(ix.pd(j))]));
  for (int i = 0; i < g; ++i) {
    double rc = sol.reduced_cost[static_cast<std::size_t>(ix.rg(i))];
    w.eta_g_lo.push_back(pos(rc));
    w.eta_g_hi.push_back(pos(-rc));
  }
  for (int j = 0; j < d; ++j) {
    double rc = sol.reduced_cost[static_cast<std::size_t>(ix.rd(j))];
    w.eta_d_lo.push_back(pos(rc));
    w.eta_d_hi.push_back(pos(-rc));
  }

  w.lmp = lmp(w.lambda, w.mu_lo, w.mu_hi, loss_factors(c), effective_isf(c));
  return w;
}

}  // namespace trimarket
