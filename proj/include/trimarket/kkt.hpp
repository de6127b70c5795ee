#pragma once

#include <algorithm>
#include <cmath>
#include <string>
#include <vector>

#include "trimarket/euc.hpp"
#include "trimarket/network.hpp"
#include "trimarket/types.hpp"
#include "trimarket/wem.hpp"

namespace trimarket {

/// Residual report over one optimality system. Complementarity residuals use
/// min(slack, dual), which is robust to one factor being large while the
/// other sits at the solver's feasibility tolerance.
struct KktReport {
  struct Entry {
    std::string name;
    double residual = 0.0;
  };
  double max_stationarity = 0.0;
  double max_primal = 0.0;
  double max_dual = 0.0;
  double max_complementarity = 0.0;
  std::vector<Entry> entries;

  double max_any() const {
    return std::max(std::max(max_stationarity, max_primal),
                    std::max(max_dual, max_complementarity));
  }
  bool pass(double tol) const { return max_any() <= tol; }

  void stationarity(const std::string& name, double v) {
    double r = std::fabs(v);
    entries.push_back({name, r});
    max_stationarity = std::max(max_stationarity, r);
  }
  void primal(const std::string& name, double violation) {
    double r = std::max(0.0, violation);
    entries.push_back({name, r});
    max_primal = std::max(max_primal, r);
  }
  void dual(const std::string& name, double value) {
    double r = std::max(0.0, -value);
    entries.push_back({name, r});
    max_dual = std::max(max_dual, r);
  }
  void complementarity(const std::string& name, double slack, double dual_value) {
    double r = std::min(std::max(slack, 0.0), std::max(dual_value, 0.0));
    entries.push_back({name, r});
    max_complementarity = std::max(max_complementarity, r);
  }
  double entry(const std::string& name) const {
    for (const auto& e : entries)
      if (e.name == name) return e.residual;
    return -1.0;
  }
};

/// Residuals of the wholesale clearing optimality system at a candidate
/// primal/dual point under the given bid prices.
inline KktReport wem_kkt_residuals(const Case& c, const BidPrices& bids,
                                   const WemClearing& w) {
  KktReport rep;
  const int g = c.n_gens(), d = c.n_bids(), l = c.n_lines();
  IsfMatrix isf = effective_isf(c);
  LossFactors lf = loss_factors(c);
  auto num = [](int i) { return std::to_string(i); };

  // Nodal price expression at a bus (Eq. 2 without the loss term applied).
  auto price_at = [&](int bus) {
    double v = w.lambda * (1.0 - lf.values[static_cast<std::size_t>(bus - 1)]);
    for (int ell = 0; ell < l; ++ell)
      v += (w.mu_lo[static_cast<std::size_t>(ell)] - w.mu_hi[static_cast<std::size_t>(ell)]) *
           isf.values(static_cast<std::size_t>(ell), static_cast<std::size_t>(bus - 1));
    return v;
  };

  // Stationarity (one row per primal variable).
  for (int i = 0; i < g; ++i) {
    const GenOffer& o = c.gen_offers[static_cast<std::size_t>(i)];
    rep.stationarity("stat_pg" + num(i), o.energy_price - price_at(o.bus) -
                                             w.rho_g_lo[static_cast<std::size_t>(i)] +
                                             w.rho_g_hi[static_cast<std::size_t>(i)]);
    rep.stationarity("stat_rg" + num(i), o.reserve_price - w.nu +
                                             w.rho_g_hi[static_cast<std::size_t>(i)] -
                                             w.eta_g_lo[static_cast<std::size_t>(i)] +
                                             w.eta_g_hi[static_cast<std::size_t>(i)]);
  }
  for (int j = 0; j < d; ++j) {
    const LseBid& b = c.lse_bids[static_cast<std::size_t>(j)];
    rep.stationarity("stat_pd" + num(j), -bids.energy[static_cast<std::size_t>(j)] +
                                             price_at(b.bus) -
                                             w.rho_d_lo[static_cast<std::size_t>(j)] +
                                             w.rho_d_hi[static_cast<std::size_t>(j)]);
    rep.stationarity("stat_rd" + num(j), bids.reserve[static_cast<std::size_t>(j)] - w.nu +
                                             w.rho_d_lo[static_cast<std::size_t>(j)] -
                                             w.eta_d_lo[static_cast<std::size_t>(j)] +
                                             w.eta_d_hi[static_cast<std::size_t>(j)]);
  }

  // Primal feasibility and the slack values reused for complementarity.
  double balance = 0.0;
  for (int i = 0; i < g; ++i)
    balance += (1.0 - lf.values[static_cast<std::size_t>(c.gen_offers[static_cast<std::size_t>(i)].bus - 1)]) *
               w.p_g[static_cast<std::size_t>(i)];
  for (int j = 0; j < d; ++j)
    balance -= (1.0 - lf.values[static_cast<std::size_t>(c.lse_bids[static_cast<std::size_t>(j)].bus - 1)]) *
               w.p_d[static_cast<std::size_t>(j)];
  rep.primal("primal_balance", std::fabs(balance));

  std::vector<double> flow(static_cast<std::size_t>(l), 0.0);
  for (int ell = 0; ell < l; ++ell) {
    double f = 0.0;
    for (int i = 0; i < g; ++i)
      f += isf.values(static_cast<std::size_t>(ell),
                      static_cast<std::size_t>(c.gen_offers[static_cast<std::size_t>(i)].bus - 1)) *
           w.p_g[static_cast<std::size_t>(i)];
    for (int j = 0; j < d; ++j)
      f -= isf.values(static_cast<std::size_t>(ell),
                      static_cast<std::size_t>(c.lse_bids[static_cast<std::size_t>(j)].bus - 1)) *
           w.p_d[static_cast<std::size_t>(j)];
    flow[static_cast<std::size_t>(ell)] = f;
    double fbar = c.lines[static_cast<std::size_t>(ell)].flow_limit;
    rep.primal("primal_flow_lo" + num(ell), -fbar - f);
    rep.primal("primal_flow_hi" + num(ell), f - fbar);
  }

  double rsum = 0.0;
  for (double v : w.r_g) rsum += v;
  for (double v : w.r_d) rsum += v;
  rep.primal("primal_reserve", c.reserve_req - rsum);

  for (int i = 0; i < g; ++i) {
    const GenOffer& o = c.gen_offers[static_cast<std::size_t>(i)];
    rep.primal("primal_pg_lo" + num(i), o.p_min - w.p_g[static_cast<std::size_t>(i)]);
    rep.primal("primal_pg_hi" + num(i),
               w.p_g[static_cast<std::size_t>(i)] + w.r_g[static_cast<std::size_t>(i)] - o.p_max);
    rep.primal("primal_rg_lo" + num(i), -w.r_g[static_cast<std::size_t>(i)]);
    rep.primal("primal_rg_hi" + num(i), w.r_g[static_cast<std::size_t>(i)] - o.r_max);
  }
  for (int j = 0; j < d; ++j) {
    const LseBid& b = c.lse_bids[static_cast<std::size_t>(j)];
    rep.primal("primal_pd_lo" + num(j),
               b.p_min - (w.p_d[static_cast<std::size_t>(j)] - w.r_d[static_cast<std::size_t>(j)]));
    rep.primal("primal_pd_hi" + num(j), w.p_d[static_cast<std::size_t>(j)] - b.p_max);
    rep.primal("primal_rd_lo" + num(j), -w.r_d[static_cast<std::size_t>(j)]);
    rep.primal("primal_rd_hi" + num(j), w.r_d[static_cast<std::size_t>(j)] - b.r_max);
  }

  // Dual feasibility.
  for (int ell = 0; ell < l; ++ell) {
    rep.dual("dual_mu_lo" + num(ell), w.mu_lo[static_cast<std::size_t>(ell)]);
    rep.dual("dual_mu_hi" + num(ell), w.mu_hi[static_cast<std::size_t>(ell)]);
  }
  rep.dual("dual_nu", w.nu);
  for (int i = 0; i < g; ++i) {
    rep.dual("dual_rho_g_lo" + num(i), w.rho_g_lo[static_cast<std::size_t>(i)]);
    rep.dual("dual_rho_g_hi" + num(i), w.rho_g_hi[static_cast<std::size_t>(i)]);
    rep.dual("dual_eta_g_lo" + num(i), w.eta_g_lo[static_cast<std::size_t>(i)]);
    rep.dual("dual_eta_g_hi" + num(i), w.eta_g_hi[static_cast<std::size_t>(i)]);
  }
  for (int j = 0; j < d; ++j) {
    rep.dual("dual_rho_d_lo" + num(j), w.rho_d_lo[static_cast<std::size_t>(j)]);
    rep.dual("dual_rho_d_hi" + num(j), w.rho_d_hi[static_cast<std::size_t>(j)]);
    rep.dual("dual_eta_d_lo" + num(j), w.eta_d_lo[static_cast<std::size_t>(j)]);
    rep.dual("dual_eta_d_hi" + num(j), w.eta_d_hi[static_cast<std::size_t>(j)]);
  }

  // Complementary slackness.
  for (int ell = 0; ell < l; ++ell) {
    double fbar = c.lines[static_cast<std::size_t>(ell)].flow_limit;
    rep.complementarity("comp_mu_lo" + num(ell), flow[static_cast<std::size_t>(ell)] + fbar,
                        w.mu_lo[static_cast<std::size_t>(ell)]);
    rep.complementarity("comp_mu_hi" + num(ell), fbar - flow[static_cast<std::size_t>(ell)],
                        w.mu_hi[static_cast<std::size_t>(ell)]);
  }
  rep.complementarity("comp_nu", rsum - c.reserve_req, w.nu);
  for (int i = 0; i < g; ++i) {
    const GenOffer& o = c.gen_offers[static_cast<std::size_t>(i)];
    rep.complementarity("comp_rho_g_lo" + num(i),
                        w.p_g[static_cast<std::size_t>(i)] - o.p_min,
                        w.rho_g_lo[static_cast<std::size_t>(i)]);
    rep.complementarity("comp_rho_g_hi" + num(i),
                        o.p_max - w.p_g[static_cast<std::size_t>(i)] - w.r_g[static_cast<std::size_t>(i)],
                        w.rho_g_hi[static_cast<std::size_t>(i)]);
    rep.complementarity("comp_eta_g_lo" + num(i), w.r_g[static_cast<std::size_t>(i)],
                        w.eta_g_lo[static_cast<std::size_t>(i)]);
    rep.complementarity("comp_eta_g_hi" + num(i),
                        o.r_max - w.r_g[static_cast<std::size_t>(i)],
                        w.eta_g_hi[static_cast<std::size_t>(i)]);
  }
  for (int j = 0; j < d; ++j) {
    const LseBid& b = c.lse_bids[static_cast<std::size_t>(j)];
    rep.complementarity("comp_rho_d_lo" + num(j),
                        w.p_d[static_cast<std::size_t>(j)] - w.r_d[static_cast<std::size_t>(j)] - b.p_min,
                        w.rho_d_lo[static_cast<std::size_t>(j)]);
    rep.complementarity("comp_rho_d_hi" + num(j),
                        b.p_max - w.p_d[static_cast<std::size_t>(j)],
                        w.rho_d_hi[static_cast<std::size_t>(j)]);
    rep.complementarity("comp_eta_d_lo" + num(j), w.r_d[static_cast<std::size_t>(j)],
                        w.eta_d_lo[static_cast<std::size_t>(j)]);
    rep.complementarity("comp_eta_d_hi" + num(j),
                        b.r_max - w.r_d[static_cast<std::size_t>(j)],
                        w.eta_d_hi[static_cast<std::size_t>(j)]);
  }
  return rep;
}

/// Residuals of one area's benefit-maximization optimality system at a
/// candidate point under posted prices.
inline KktReport euc_kkt_residuals(const PricingArea& area, double alpha, double beta,
                                   const AreaResponse& r) {
  KktReport rep;
  auto num = [](std::size_t i) { return std::to_string(i); };
  for (std::size_t b = 0; b < area.blocks.size(); ++b) {
    const EucBlock& blk = area.blocks[b];
    rep.stationarity("stat_x" + num(b),
                     -blk.benefit_price + alpha - r.gamma_lo[b] + r.gamma_hi[b]);
    rep.stationarity("stat_y" + num(b), blk.reserve_cost_price - beta + r.gamma_lo[b] -
                                            r.zeta_lo[b] + r.zeta_hi[b]);
    rep.primal("primal_couple" + num(b), blk.x_min + r.y[b] - r.x[b]);
    rep.primal("primal_x_hi" + num(b), r.x[b] - blk.x_max);
    rep.primal("primal_y_lo" + num(b), -r.y[b]);
    rep.primal("primal_y_hi" + num(b), r.y[b] - blk.y_max);
    rep.dual("dual_gamma_lo" + num(b), r.gamma_lo[b]);
    rep.dual("dual_gamma_hi" + num(b), r.gamma_hi[b]);
    rep.dual("dual_zeta_lo" + num(b), r.zeta_lo[b]);
    rep.dual("dual_zeta_hi" + num(b), r.zeta_hi[b]);
    rep.complementarity("comp_gamma_lo" + num(b), r.x[b] - r.y[b] - blk.x_min, r.gamma_lo[b]);
    rep.complementarity("comp_gamma_hi" + num(b), blk.x_max - r.x[b], r.gamma_hi[b]);
    rep.complementarity("comp_zeta_lo" + num(b), r.y[b], r.zeta_lo[b]);
    rep.complementarity("comp_zeta_hi" + num(b), blk.y_max - r.y[b], r.zeta_hi[b]);
  }
  return rep;
}

}  // namespace trimarket
