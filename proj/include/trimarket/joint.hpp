#pragma once

#include <cmath>
#include <map>
#include <optional>
#include <sstream>
#include <stdexcept>
#include <string>
#include <vector>

#include "trimarket/branch_and_bound.hpp"
#include "trimarket/euc.hpp"
#include "trimarket/kkt.hpp"
#include "trimarket/milp_model.hpp"
#include "trimarket/network.hpp"
#include "trimarket/types.hpp"
#include "trimarket/wem.hpp"

namespace trimarket {

enum class Variant { kFull, kNonprofit, kEqualPrice, kNoReserve };

inline const char* to_string(Variant v) {
  switch (v) {
    case Variant::kFull: return "full";
    case Variant::kNonprofit: return "nonprofit";
    case Variant::kEqualPrice: return "equal-price";
    case Variant::kNoReserve: return "no-reserve";
  }
  return "?";
}

inline Variant variant_from_string(const std::string& s) {
  if (s == "full") return Variant::kFull;
  if (s == "nonprofit") return Variant::kNonprofit;
  if (s == "equal-price" || s == "equal_price") return Variant::kEqualPrice;
  if (s == "no-reserve" || s == "no_reserve") return Variant::kNoReserve;
  throw std::invalid_argument("unknown variant: " + s);
}

/// Dual-side big-M values and decision-variable bounds in effect for one
/// build. Values come from the case's policy when given, otherwise they are
/// derived from the case's price data with generous headroom; the post-solve
/// audit in solve_joint doubles any value a dual actually reaches.
struct ResolvedBigM {
  double flow = 0.0, reserve = 0.0, gen_box = 0.0, gen_reserve = 0.0;
  double bid_box = 0.0, bid_reserve = 0.0, euc = 0.0;
  double price_bound = 0.0;
  double lambda_bound = 0.0;

  double dual_for(PairGroup g) const {
    switch (g) {
      case PairGroup::kFlow: return flow;
      case PairGroup::kReserve: return reserve;
      case PairGroup::kGenBox: return gen_box;
      case PairGroup::kGenReserve: return gen_reserve;
      case PairGroup::kBidBox: return bid_box;
      case PairGroup::kBidReserve: return bid_reserve;
      case PairGroup::kEuc: return euc;
    }
    return 0.0;
  }
};

inline ResolvedBigM resolve_bigm(const Case& c) {
  // Energy- and reserve-price ranges of the instance. Nodal prices live in
  // the convex hull of marginal offer/bid/benefit prices (plus congestion
  // spreads of the same magnitude), so box duals |a - pi| are bounded by the
  // energy span; reserve duals analogously. Every value derived here feeds
  // a bound that the post-solve audit verifies and, if hit, doubles.
  double e_lo = kInf, e_hi = -kInf;
  double r_hi = 1.0;
  auto energy = [&](double v) {
    e_lo = std::min(e_lo, v);
    e_hi = std::max(e_hi, v);
  };
  for (const auto& o : c.gen_offers) {
    energy(o.energy_price);
    r_hi = std::max(r_hi, std::fabs(o.reserve_price));
  }
  for (const auto& b : c.lse_bids)
    if (!b.strategic) {
      energy(b.energy_price);
      r_hi = std::max(r_hi, std::fabs(b.reserve_price));
    }
  for (const auto& a : c.areas)
    for (const auto& blk : a.blocks) {
      energy(blk.benefit_price);
      r_hi = std::max(r_hi, std::fabs(blk.reserve_cost_price));
    }
  if (e_lo > e_hi) {
    e_lo = 0.0;
    e_hi = 1.0;
  }
  e_lo = std::min(e_lo, 0.0);
  const double e_span = e_hi - e_lo;
  const double e_mag = std::max(std::fabs(e_hi), std::fabs(e_lo));

  ResolvedBigM m;
  m.price_bound =
      (c.bigm.price_var_bound > 0.0) ? c.bigm.price_var_bound : e_mag + 4.0 * r_hi + 50.0;
  m.lambda_bound = (c.bigm.lambda_bound > 0.0) ? c.bigm.lambda_bound : 2.0 * e_mag + 50.0;
  double dflt = c.bigm.dual_default;
  auto pick = [&](const char* name, double auto_value) {
    double g = c.bigm.group_value(name);
    if (g > 0.0) return g;
    return (dflt > 0.0) ? dflt : auto_value;
  };
  m.flow = pick("flow", 2.0 * e_span + 20.0);
  m.reserve = pick("reserve", 4.0 * r_hi + 20.0);
  m.gen_box = pick("gen_box", e_span + 20.0);
  m.bid_box = pick("bid_box", e_span + 20.0);
  // eta = |b - nu + rho| up to the reserve and box scales combined
  m.gen_reserve = pick("gen_reserve", 5.0 * r_hi + e_span + 40.0);
  m.bid_reserve = pick("bid_reserve", 5.0 * r_hi + e_span + 40.0);
  m.euc = pick("euc", 0.0);  // 0 means per-block derivation in the builder
  return m;
}

struct JointBuildOptions {
  Variant variant = Variant::kFull;
  std::optional<std::vector<double>> fix_alpha;  // per area, substituted as constants
  std::optional<std::vector<double>> fix_beta;
  std::map<std::string, double> pair_m_override;  // pair name -> dual-side M
};

namespace joint_detail {

struct PendingPair {
  std::string name;
  PairGroup group;
  int dual_var = -1;
  std::vector<int> idx;       // slack expression, variable part
  std::vector<double> val;
  double cnst = 0.0;          // slack expression, constant part
  double m_slack = 0.0;
  double m_dual = 0.0;
};

}  // namespace joint_detail

/// Assembles the single-level program equivalent to the bilevel
/// bidding-and-pricing problem: optimality systems of the wholesale clearing
/// and of every pricing area's customers, balances, price caps, big-M
/// linearized complementarity, and the duality-linearized objective.
class JointBuilder {
 public:
  JointBuilder(const Case& c, JointBuildOptions opt) : opt_(std::move(opt)), work_(c) {
    if (opt_.variant == Variant::kNoReserve) {
      for (auto& g : work_.gen_offers) g.r_max = 0.0;
      for (auto& b : work_.lse_bids) b.r_max = 0.0;
      for (auto& a : work_.areas)
        for (auto& blk : a.blocks) blk.y_max = 0.0;
      work_.reserve_req = 0.0;
    }
    isf_ = effective_isf(work_);
    lf_ = loss_factors(work_);
    mm_ = resolve_bigm(work_);
    strategic_ = work_.strategic_bid_ids();
  }

  MilpModel build() {
    add_variables();
    assemble_wem_kkt();
    assemble_euc_kkt();
    add_balances();
    add_variant_rows();
    linearize_complementarity();
    build_objective();
    model_.is_joint = true;
    model_.variant_tag = static_cast<int>(opt_.variant);
    if (opt_.fix_alpha) model_.fixed_alpha = *opt_.fix_alpha;
    if (opt_.fix_beta) model_.fixed_beta = *opt_.fix_beta;
    return std::move(model_);
  }

  const Case& working_case() const { return work_; }

 private:
  static std::string num(int i) { return std::to_string(i); }

  bool strategic_bid(int j) const { return work_.lse_bids[static_cast<std::size_t>(j)].strategic; }

  double alpha_const(int k) const { return (*opt_.fix_alpha)[static_cast<std::size_t>(k)]; }
  double beta_const(int k) const { return (*opt_.fix_beta)[static_cast<std::size_t>(k)]; }

  void add_variables() {
    const int g = work_.n_gens(), d = work_.n_bids(), l = work_.n_lines();
    auto& mp = model_.map;
    for (int i = 0; i < g; ++i) {
      const auto& o = work_.gen_offers[static_cast<std::size_t>(i)];
      mp.pg.push_back(model_.add_var("pg" + num(i), o.p_min, o.p_max));
    }
    for (int j = 0; j < d; ++j) {
      const auto& b = work_.lse_bids[static_cast<std::size_t>(j)];
      mp.pd.push_back(model_.add_var("pd" + num(j), b.p_min, b.p_max));
    }
    for (int i = 0; i < g; ++i)
      mp.rg.push_back(model_.add_var("rg" + num(i), 0.0,
                                     work_.gen_offers[static_cast<std::size_t>(i)].r_max));
    for (int j = 0; j < d; ++j)
      mp.rd.push_back(model_.add_var("rd" + num(j), 0.0,
                                     work_.lse_bids[static_cast<std::size_t>(j)].r_max));

    mp.lambda = model_.add_var("lambda", -mm_.lambda_bound, mm_.lambda_bound);
    for (int ell = 0; ell < l; ++ell) {
      mp.mu_lo.push_back(model_.add_var("mu_lo" + num(ell), 0.0, dual_m("mu_lo" + num(ell), PairGroup::kFlow)));
      mp.mu_hi.push_back(model_.add_var("mu_hi" + num(ell), 0.0, dual_m("mu_hi" + num(ell), PairGroup::kFlow)));
    }
    mp.nu = model_.add_var("nu", 0.0, dual_m("nu", PairGroup::kReserve));
    for (int i = 0; i < g; ++i) {
      mp.rho_g_lo.push_back(model_.add_var("rho_g_lo" + num(i), 0.0, dual_m("rho_g_lo" + num(i), PairGroup::kGenBox)));
      mp.rho_g_hi.push_back(model_.add_var("rho_g_hi" + num(i), 0.0, dual_m("rho_g_hi" + num(i), PairGroup::kGenBox)));
      mp.eta_g_lo.push_back(model_.add_var("eta_g_lo" + num(i), 0.0, dual_m("eta_g_lo" + num(i), PairGroup::kGenReserve)));
      mp.eta_g_hi.push_back(model_.add_var("eta_g_hi" + num(i), 0.0, dual_m("eta_g_hi" + num(i), PairGroup::kGenReserve)));
    }
    for (int j = 0; j < d; ++j) {
      mp.rho_d_lo.push_back(model_.add_var("rho_d_lo" + num(j), 0.0, dual_m("rho_d_lo" + num(j), PairGroup::kBidBox)));
      mp.rho_d_hi.push_back(model_.add_var("rho_d_hi" + num(j), 0.0, dual_m("rho_d_hi" + num(j), PairGroup::kBidBox)));
      mp.eta_d_lo.push_back(model_.add_var("eta_d_lo" + num(j), 0.0, dual_m("eta_d_lo" + num(j), PairGroup::kBidReserve)));
      mp.eta_d_hi.push_back(model_.add_var("eta_d_hi" + num(j), 0.0, dual_m("eta_d_hi" + num(j), PairGroup::kBidReserve)));
    }

    const int n_areas = work_.n_areas();
    compute_alpha_ub();
    mp.x.resize(static_cast<std::size_t>(n_areas));
    mp.y.resize(static_cast<std::size_t>(n_areas));
    mp.gamma_lo.resize(static_cast<std::size_t>(n_areas));
    mp.gamma_hi.resize(static_cast<std::size_t>(n_areas));
    mp.zeta_lo.resize(static_cast<std::size_t>(n_areas));
    mp.zeta_hi.resize(static_cast<std::size_t>(n_areas));
    for (int k = 0; k < n_areas; ++k) {
      const auto& area = work_.areas[static_cast<std::size_t>(k)];
      for (std::size_t b = 0; b < area.blocks.size(); ++b) {
        const auto& blk = area.blocks[b];
        const std::string kb = num(k) + "_" + num(static_cast<int>(b));
        mp.x[static_cast<std::size_t>(k)].push_back(
            model_.add_var("x" + kb, blk.x_min, blk.x_max));
        mp.y[static_cast<std::size_t>(k)].push_back(model_.add_var("y" + kb, 0.0, blk.y_max));
        mp.gamma_lo[static_cast<std::size_t>(k)].push_back(
            model_.add_var("gamma_lo" + kb, 0.0, euc_dual_m(blk, 0, k)));
        mp.gamma_hi[static_cast<std::size_t>(k)].push_back(
            model_.add_var("gamma_hi" + kb, 0.0, euc_dual_m(blk, 1, k)));
        mp.zeta_lo[static_cast<std::size_t>(k)].push_back(
            model_.add_var("zeta_lo" + kb, 0.0, euc_dual_m(blk, 2, k)));
        mp.zeta_hi[static_cast<std::size_t>(k)].push_back(
            model_.add_var("zeta_hi" + kb, 0.0, euc_dual_m(blk, 3, k)));
      }
    }

    for (int j : strategic_) {
      mp.a_d.push_back(model_.add_var("a_d" + num(j), -mm_.price_bound, mm_.price_bound));
      mp.b_d.push_back(model_.add_var("b_d" + num(j), -mm_.price_bound, mm_.price_bound));
    }
    for (int k = 0; k < n_areas; ++k) {
      if (opt_.fix_alpha)
        mp.alpha.push_back(-1);
      else
        mp.alpha.push_back(model_.add_var("alpha" + num(k),
                                          alpha_lb_[static_cast<std::size_t>(k)],
                                          alpha_ub_[static_cast<std::size_t>(k)]));
      if (opt_.fix_beta)
        mp.beta.push_back(-1);
      else
        mp.beta.push_back(model_.add_var("beta" + num(k), work_.caps.beta_min,
                                         beta_ub_[static_cast<std::size_t>(k)]));
    }
  }

  // Dominance bounds on the posted prices. An energy price above every
  // benefit price in the area buys nothing over alpha = max c (demand is
  // already at the reserve-backed floor and the margin can shift onto
  // beta); one below every benefit price sells the same quantities as
  // alpha = min c at a worse margin. A reserve price above the level that
  // already activates every block's reserve only pays customers more. Each
  // bound keeps at least one optimum; regulated (nonprofit) prices are
  // exempt because there alpha and beta track the wholesale duals.
  void compute_alpha_ub() {
    const int n = work_.n_areas();
    alpha_ub_.assign(static_cast<std::size_t>(n), work_.caps.alpha_max);
    alpha_lb_.assign(static_cast<std::size_t>(n), work_.caps.alpha_min);
    beta_ub_.assign(static_cast<std::size_t>(n), work_.caps.beta_max);
    if (opt_.fix_alpha) {
      for (int k = 0; k < n; ++k) {
        alpha_ub_[static_cast<std::size_t>(k)] = alpha_const(k);
        alpha_lb_[static_cast<std::size_t>(k)] = alpha_const(k);
      }
    } else if (opt_.variant != Variant::kNonprofit) {
      std::vector<double> maxc(static_cast<std::size_t>(n), -kInf);
      std::vector<double> minc(static_cast<std::size_t>(n), kInf);
      for (int k = 0; k < n; ++k)
        for (const auto& blk : work_.areas[static_cast<std::size_t>(k)].blocks) {
          maxc[static_cast<std::size_t>(k)] = std::max(maxc[static_cast<std::size_t>(k)], blk.benefit_price);
          minc[static_cast<std::size_t>(k)] = std::min(minc[static_cast<std::size_t>(k)], blk.benefit_price);
        }
      if (opt_.variant == Variant::kEqualPrice) {
        double g_max = -kInf, g_min = kInf;
        for (int k = 0; k < n; ++k) {
          g_max = std::max(g_max, maxc[static_cast<std::size_t>(k)]);
          g_min = std::min(g_min, minc[static_cast<std::size_t>(k)]);
        }
        maxc.assign(static_cast<std::size_t>(n), g_max);
        minc.assign(static_cast<std::size_t>(n), g_min);
      }
      for (int k = 0; k < n; ++k) {
        if (maxc[static_cast<std::size_t>(k)] == -kInf) continue;  // no blocks
        alpha_ub_[static_cast<std::size_t>(k)] = std::min(
            work_.caps.alpha_max, std::max(work_.caps.alpha_min, maxc[static_cast<std::size_t>(k)]));
        alpha_lb_[static_cast<std::size_t>(k)] = std::max(
            work_.caps.alpha_min, std::min(alpha_ub_[static_cast<std::size_t>(k)],
                                           minc[static_cast<std::size_t>(k)]));
      }
    }
    if (opt_.fix_beta) {
      for (int k = 0; k < n; ++k) beta_ub_[static_cast<std::size_t>(k)] = beta_const(k);
    } else if (opt_.variant != Variant::kNonprofit) {
      for (int k = 0; k < n; ++k) {
        double need = -kInf;
        for (const auto& blk : work_.areas[static_cast<std::size_t>(k)].blocks)
          need = std::max(need, blk.reserve_cost_price +
                                    std::max(0.0, alpha_ub_[static_cast<std::size_t>(k)] -
                                                      blk.benefit_price));
        if (need == -kInf) continue;
        beta_ub_[static_cast<std::size_t>(k)] = std::min(
            work_.caps.beta_max, std::max(work_.caps.beta_min, need + 0.5));
      }
    }
  }

  double dual_m(const std::string& pair_name, PairGroup g) const {
    auto it = opt_.pair_m_override.find(pair_name);
    if (it != opt_.pair_m_override.end()) return it->second;
    double m = mm_.dual_for(g);
    if (m <= 0.0) throw std::runtime_error("nonpositive dual big-M for group " +
                                           std::string(to_string(g)));
    return m;
  }

  // Per-block dual caps derived from the canonical optimal dual construction;
  // side: 0 gamma_lo, 1 gamma_hi, 2 zeta_lo, 3 zeta_hi. The caps use the
  // tightened per-area price bounds; the coupling duals only need the
  // reserve-margin headroom when the reserve cap exceeds the block span.
  double euc_dual_m(const EucBlock& blk, int side, int area) const {
    if (mm_.euc > 0.0) return mm_.euc;
    const auto& caps = work_.caps;
    double aub = alpha_ub_[static_cast<std::size_t>(area)];
    double alb = alpha_lb_[static_cast<std::size_t>(area)];
    double bub = beta_ub_[static_cast<std::size_t>(area)];
    double e_hi = std::max(0.0, blk.benefit_price - alb);
    double e_lo = std::max(0.0, aub - blk.benefit_price);
    double m_hi = std::max(0.0, bub - blk.reserve_cost_price);
    double m_lo = std::max(0.0, blk.reserve_cost_price - caps.beta_min);
    bool coupling_can_bind = blk.y_max > blk.x_max - blk.x_min;
    switch (side) {
      case 0: return e_lo + (coupling_can_bind ? m_hi : 0.0) + 0.25;
      case 1: return e_hi + (coupling_can_bind ? m_hi : 0.0) + 0.25;
      case 2: return m_lo + e_lo + 0.25;
      default: return m_hi + 0.25;
    }
  }

  // Nodal price expression terms for a bus: coef * lambda + sum over lines.
  void add_price_terms(MilpModel::Row& r, int bus, double sign) {
    r.idx.push_back(model_.map.lambda);
    r.val.push_back(sign * (1.0 - lf_.values[static_cast<std::size_t>(bus - 1)]));
    for (int ell = 0; ell < work_.n_lines(); ++ell) {
      double psi = isf_.values(static_cast<std::size_t>(ell), static_cast<std::size_t>(bus - 1));
      if (psi == 0.0) continue;
      r.idx.push_back(model_.map.mu_lo[static_cast<std::size_t>(ell)]);
      r.val.push_back(sign * psi);
      r.idx.push_back(model_.map.mu_hi[static_cast<std::size_t>(ell)]);
      r.val.push_back(-sign * psi);
    }
  }

  void assemble_wem_kkt() {
    const int g = work_.n_gens(), d = work_.n_bids(), l = work_.n_lines();
    const auto& mp = model_.map;

    // Stationarity, one equality row per wholesale primal variable.
    for (int i = 0; i < g; ++i) {
      const auto& o = work_.gen_offers[static_cast<std::size_t>(i)];
      MilpModel::Row r;
      r.name = "wstat_pg" + num(i);
      add_price_terms(r, o.bus, -1.0);
      r.idx.push_back(mp.rho_g_lo[static_cast<std::size_t>(i)]);
      r.val.push_back(-1.0);
      r.idx.push_back(mp.rho_g_hi[static_cast<std::size_t>(i)]);
      r.val.push_back(1.0);
      r.lo = r.hi = -o.energy_price;
      model_.add_row(std::move(r));
    }
    {
      int s = 0;
      for (int j = 0; j < d; ++j) {
        const auto& b = work_.lse_bids[static_cast<std::size_t>(j)];
        MilpModel::Row r;
        r.name = "wstat_pd" + num(j);
        add_price_terms(r, b.bus, 1.0);
        r.idx.push_back(mp.rho_d_lo[static_cast<std::size_t>(j)]);
        r.val.push_back(-1.0);
        r.idx.push_back(mp.rho_d_hi[static_cast<std::size_t>(j)]);
        r.val.push_back(1.0);
        if (strategic_bid(j)) {
          r.idx.push_back(mp.a_d[static_cast<std::size_t>(s)]);
          r.val.push_back(-1.0);
          r.lo = r.hi = 0.0;
          ++s;
        } else {
          r.lo = r.hi = b.energy_price;
        }
        model_.add_row(std::move(r));
      }
    }
    for (int i = 0; i < g; ++i) {
      const auto& o = work_.gen_offers[static_cast<std::size_t>(i)];
      MilpModel::Row r;
      r.name = "wstat_rg" + num(i);
      r.idx = {mp.nu, mp.rho_g_hi[static_cast<std::size_t>(i)],
               mp.eta_g_lo[static_cast<std::size_t>(i)], mp.eta_g_hi[static_cast<std::size_t>(i)]};
      r.val = {-1.0, 1.0, -1.0, 1.0};
      r.lo = r.hi = -o.reserve_price;
      model_.add_row(std::move(r));
    }
    {
      int s = 0;
      for (int j = 0; j < d; ++j) {
        const auto& b = work_.lse_bids[static_cast<std::size_t>(j)];
        MilpModel::Row r;
        r.name = "wstat_rd" + num(j);
        r.idx = {mp.nu, mp.rho_d_lo[static_cast<std::size_t>(j)],
                 mp.eta_d_lo[static_cast<std::size_t>(j)], mp.eta_d_hi[static_cast<std::size_t>(j)]};
        r.val = {-1.0, 1.0, -1.0, 1.0};
        if (strategic_bid(j)) {
          r.idx.push_back(mp.b_d[static_cast<std::size_t>(s)]);
          r.val.push_back(1.0);
          r.lo = r.hi = 0.0;
          ++s;
        } else {
          r.lo = r.hi = -b.reserve_price;
        }
        model_.add_row(std::move(r));
      }
    }

    // Primal feasibility rows (box sides live on the variable bounds).
    {
      MilpModel::Row r;
      r.name = "wem_balance";
      for (int i = 0; i < g; ++i) {
        r.idx.push_back(mp.pg[static_cast<std::size_t>(i)]);
        r.val.push_back(1.0 - lf_.values[static_cast<std::size_t>(
                                  work_.gen_offers[static_cast<std::size_t>(i)].bus - 1)]);
      }
      for (int j = 0; j < d; ++j) {
        r.idx.push_back(mp.pd[static_cast<std::size_t>(j)]);
        r.val.push_back(-(1.0 - lf_.values[static_cast<std::size_t>(
                                    work_.lse_bids[static_cast<std::size_t>(j)].bus - 1)]));
      }
      r.lo = r.hi = 0.0;
      model_.add_row(std::move(r));
    }
    flow_rows_.clear();
    for (int ell = 0; ell < l; ++ell) {
      MilpModel::Row r;
      r.name = "flow" + num(ell);
      for (int i = 0; i < g; ++i) {
        double psi = isf_.values(static_cast<std::size_t>(ell),
                                 static_cast<std::size_t>(work_.gen_offers[static_cast<std::size_t>(i)].bus - 1));
        if (psi == 0.0) continue;
        r.idx.push_back(mp.pg[static_cast<std::size_t>(i)]);
        r.val.push_back(psi);
      }
      for (int j = 0; j < d; ++j) {
        double psi = isf_.values(static_cast<std::size_t>(ell),
                                 static_cast<std::size_t>(work_.lse_bids[static_cast<std::size_t>(j)].bus - 1));
        if (psi == 0.0) continue;
        r.idx.push_back(mp.pd[static_cast<std::size_t>(j)]);
        r.val.push_back(-psi);
      }
      double fbar = work_.lines[static_cast<std::size_t>(ell)].flow_limit;
      r.lo = -fbar;
      r.hi = fbar;
      flow_rows_.push_back(model_.add_row(std::move(r)));
    }
    {
      MilpModel::Row r;
      r.name = "reserve";
      for (int i = 0; i < g; ++i) {
        r.idx.push_back(mp.rg[static_cast<std::size_t>(i)]);
        r.val.push_back(1.0);
      }
      for (int j = 0; j < d; ++j) {
        r.idx.push_back(mp.rd[static_cast<std::size_t>(j)]);
        r.val.push_back(1.0);
      }
      r.lo = work_.reserve_req;
      r.hi = kInf;
      model_.add_row(std::move(r));
    }
    for (int i = 0; i < g; ++i) {
      MilpModel::Row r;
      r.name = "gen_hi" + num(i);
      r.idx = {mp.pg[static_cast<std::size_t>(i)], mp.rg[static_cast<std::size_t>(i)]};
      r.val = {1.0, 1.0};
      r.lo = -kInf;
      r.hi = work_.gen_offers[static_cast<std::size_t>(i)].p_max;
      model_.add_row(std::move(r));
    }
    for (int j = 0; j < d; ++j) {
      MilpModel::Row r;
      r.name = "bid_lo" + num(j);
      r.idx = {mp.pd[static_cast<std::size_t>(j)], mp.rd[static_cast<std::size_t>(j)]};
      r.val = {1.0, -1.0};
      r.lo = work_.lse_bids[static_cast<std::size_t>(j)].p_min;
      r.hi = kInf;
      model_.add_row(std::move(r));
    }

    stage_wem_pairs();
  }

  void stage_wem_pairs() {
    const int g = work_.n_gens(), d = work_.n_bids(), l = work_.n_lines();
    const auto& mp = model_.map;

    // Net-injection magnitude bound per bus, used to tighten flow slacks.
    std::vector<double> inj_lo(static_cast<std::size_t>(work_.n_buses()), 0.0);
    std::vector<double> inj_hi(static_cast<std::size_t>(work_.n_buses()), 0.0);
    for (const auto& o : work_.gen_offers) {
      inj_hi[static_cast<std::size_t>(o.bus - 1)] += o.p_max;
      inj_lo[static_cast<std::size_t>(o.bus - 1)] += o.p_min;
    }
    for (const auto& b : work_.lse_bids) {
      inj_lo[static_cast<std::size_t>(b.bus - 1)] -= b.p_max;
      inj_hi[static_cast<std::size_t>(b.bus - 1)] -= b.p_min;
    }

    for (int ell = 0; ell < l; ++ell) {
      double fbar = work_.lines[static_cast<std::size_t>(ell)].flow_limit;
      double mass = 0.0;
      for (int bus = 0; bus < work_.n_buses(); ++bus) {
        double psi = isf_.values(static_cast<std::size_t>(ell), static_cast<std::size_t>(bus));
        mass += std::fabs(psi) * std::max(std::fabs(inj_lo[static_cast<std::size_t>(bus)]),
                                          std::fabs(inj_hi[static_cast<std::size_t>(bus)]));
      }
      double ms = std::min(2.0 * fbar, fbar + mass);
      const auto& frow = model_.rows[static_cast<std::size_t>(flow_rows_[static_cast<std::size_t>(ell)])];
      joint_detail::PendingPair plo;
      plo.name = "mu_lo" + num(ell);
      plo.group = PairGroup::kFlow;
      plo.dual_var = mp.mu_lo[static_cast<std::size_t>(ell)];
      plo.idx = frow.idx;
      plo.val = frow.val;
      plo.cnst = fbar;  // s = flow + fbar
      plo.m_slack = ms;
      pending_.push_back(plo);

      joint_detail::PendingPair phi;
      phi.name = "mu_hi" + num(ell);
      phi.group = PairGroup::kFlow;
      phi.dual_var = mp.mu_hi[static_cast<std::size_t>(ell)];
      phi.idx = frow.idx;
      phi.val = frow.val;
      for (double& v : phi.val) v = -v;
      phi.cnst = fbar;  // s = fbar - flow
      phi.m_slack = ms;
      pending_.push_back(phi);
    }

    {
      joint_detail::PendingPair p;
      p.name = "nu";
      p.group = PairGroup::kReserve;
      p.dual_var = mp.nu;
      double cap = 0.0;
      for (int i = 0; i < g; ++i) {
        p.idx.push_back(mp.rg[static_cast<std::size_t>(i)]);
        p.val.push_back(1.0);
        cap += work_.gen_offers[static_cast<std::size_t>(i)].r_max;
      }
      for (int j = 0; j < d; ++j) {
        p.idx.push_back(mp.rd[static_cast<std::size_t>(j)]);
        p.val.push_back(1.0);
        cap += work_.lse_bids[static_cast<std::size_t>(j)].r_max;
      }
      p.cnst = -work_.reserve_req;
      p.m_slack = std::max(0.0, cap - work_.reserve_req);
      pending_.push_back(p);
    }

    for (int i = 0; i < g; ++i) {
      const auto& o = work_.gen_offers[static_cast<std::size_t>(i)];
      double span = o.p_max - o.p_min;
      {
        joint_detail::PendingPair p;
        p.name = "rho_g_lo" + num(i);
        p.group = PairGroup::kGenBox;
        p.dual_var = mp.rho_g_lo[static_cast<std::size_t>(i)];
        p.idx = {mp.pg[static_cast<std::size_t>(i)]};
        p.val = {1.0};
        p.cnst = -o.p_min;
        p.m_slack = span;
        pending_.push_back(p);
      }
      {
        joint_detail::PendingPair p;
        p.name = "rho_g_hi" + num(i);
        p.group = PairGroup::kGenBox;
        p.dual_var = mp.rho_g_hi[static_cast<std::size_t>(i)];
        p.idx = {mp.pg[static_cast<std::size_t>(i)], mp.rg[static_cast<std::size_t>(i)]};
        p.val = {-1.0, -1.0};
        p.cnst = o.p_max;
        p.m_slack = span;
        pending_.push_back(p);
      }
      {
        joint_detail::PendingPair p;
        p.name = "eta_g_lo" + num(i);
        p.group = PairGroup::kGenReserve;
        p.dual_var = mp.eta_g_lo[static_cast<std::size_t>(i)];
        p.idx = {mp.rg[static_cast<std::size_t>(i)]};
        p.val = {1.0};
        p.m_slack = o.r_max;
        pending_.push_back(p);
      }
      {
        joint_detail::PendingPair p;
        p.name = "eta_g_hi" + num(i);
        p.group = PairGroup::kGenReserve;
        p.dual_var = mp.eta_g_hi[static_cast<std::size_t>(i)];
        p.idx = {mp.rg[static_cast<std::size_t>(i)]};
        p.val = {-1.0};
        p.cnst = o.r_max;
        p.m_slack = o.r_max;
        pending_.push_back(p);
      }
    }

    for (int j = 0; j < d; ++j) {
      const auto& b = work_.lse_bids[static_cast<std::size_t>(j)];
      double span = b.p_max - b.p_min;
      {
        joint_detail::PendingPair p;
        p.name = "rho_d_lo" + num(j);
        p.group = PairGroup::kBidBox;
        p.dual_var = mp.rho_d_lo[static_cast<std::size_t>(j)];
        p.idx = {mp.pd[static_cast<std::size_t>(j)], mp.rd[static_cast<std::size_t>(j)]};
        p.val = {1.0, -1.0};
        p.cnst = -b.p_min;
        p.m_slack = span;
        pending_.push_back(p);
      }
      {
        joint_detail::PendingPair p;
        p.name = "rho_d_hi" + num(j);
        p.group = PairGroup::kBidBox;
        p.dual_var = mp.rho_d_hi[static_cast<std::size_t>(j)];
        p.idx = {mp.pd[static_cast<std::size_t>(j)]};
        p.val = {-1.0};
        p.cnst = b.p_max;
        p.m_slack = span;
        pending_.push_back(p);
      }
      {
        joint_detail::PendingPair p;
        p.name = "eta_d_lo" + num(j);
        p.group = PairGroup::kBidReserve;
        p.dual_var = mp.eta_d_lo[static_cast<std::size_t>(j)];
        p.idx = {mp.rd[static_cast<std::size_t>(j)]};
        p.val = {1.0};
        p.m_slack = b.r_max;
        pending_.push_back(p);
      }
      {
        joint_detail::PendingPair p;
        p.name = "eta_d_hi" + num(j);
        p.group = PairGroup::kBidReserve;
        p.dual_var = mp.eta_d_hi[static_cast<std::size_t>(j)];
        p.idx = {mp.rd[static_cast<std::size_t>(j)]};
        p.val = {-1.0};
        p.cnst = b.r_max;
        p.m_slack = b.r_max;
        pending_.push_back(p);
      }
    }
  }

  void assemble_euc_kkt() {
    const auto& mp = model_.map;
    for (int k = 0; k < work_.n_areas(); ++k) {
      const auto& area = work_.areas[static_cast<std::size_t>(k)];
      for (std::size_t b = 0; b < area.blocks.size(); ++b) {
        const auto& blk = area.blocks[b];
        const std::string kb = num(k) + "_" + num(static_cast<int>(b));
        {
          MilpModel::Row r;  // -c + alpha - gamma_lo + gamma_hi = 0
          r.name = "estat_x" + kb;
          r.idx = {mp.gamma_lo[static_cast<std::size_t>(k)][b], mp.gamma_hi[static_cast<std::size_t>(k)][b]};
          r.val = {-1.0, 1.0};
          double rhs = blk.benefit_price;
          if (opt_.fix_alpha) rhs -= alpha_const(k);
          else {
            r.idx.push_back(mp.alpha[static_cast<std::size_t>(k)]);
            r.val.push_back(1.0);
          }
          r.lo = r.hi = rhs;
          model_.add_row(std::move(r));
        }
        {
          MilpModel::Row r;  // d - beta + gamma_lo - zeta_lo + zeta_hi = 0
          r.name = "estat_y" + kb;
          r.idx = {mp.gamma_lo[static_cast<std::size_t>(k)][b], mp.zeta_lo[static_cast<std::size_t>(k)][b],
                   mp.zeta_hi[static_cast<std::size_t>(k)][b]};
          r.val = {1.0, -1.0, 1.0};
          double rhs = -blk.reserve_cost_price;
          if (opt_.fix_beta) rhs += beta_const(k);
          else {
            r.idx.push_back(mp.beta[static_cast<std::size_t>(k)]);
            r.val.push_back(-1.0);
          }
          r.lo = r.hi = rhs;
          model_.add_row(std::move(r));
        }
        {
          MilpModel::Row r;  // x - y >= x_min
          r.name = "couple" + kb;
          r.idx = {mp.x[static_cast<std::size_t>(k)][b], mp.y[static_cast<std::size_t>(k)][b]};
          r.val = {1.0, -1.0};
          r.lo = blk.x_min;
          r.hi = kInf;
          model_.add_row(std::move(r));
        }
        double span = blk.x_max - blk.x_min;
        {
          joint_detail::PendingPair p;
          p.name = "gamma_lo" + kb;
          p.group = PairGroup::kEuc;
          p.dual_var = mp.gamma_lo[static_cast<std::size_t>(k)][b];
          p.idx = {mp.x[static_cast<std::size_t>(k)][b], mp.y[static_cast<std::size_t>(k)][b]};
          p.val = {1.0, -1.0};
          p.cnst = -blk.x_min;
          p.m_slack = span;
          pending_.push_back(p);
        }
        {
          joint_detail::PendingPair p;
          p.name = "gamma_hi" + kb;
          p.group = PairGroup::kEuc;
          p.dual_var = mp.gamma_hi[static_cast<std::size_t>(k)][b];
          p.idx = {mp.x[static_cast<std::size_t>(k)][b]};
          p.val = {-1.0};
          p.cnst = blk.x_max;
          p.m_slack = span;
          pending_.push_back(p);
        }
        {
          joint_detail::PendingPair p;
          p.name = "zeta_lo" + kb;
          p.group = PairGroup::kEuc;
          p.dual_var = mp.zeta_lo[static_cast<std::size_t>(k)][b];
          p.idx = {mp.y[static_cast<std::size_t>(k)][b]};
          p.val = {1.0};
          p.m_slack = blk.y_max;
          pending_.push_back(p);
        }
        {
          joint_detail::PendingPair p;
          p.name = "zeta_hi" + kb;
          p.group = PairGroup::kEuc;
          p.dual_var = mp.zeta_hi[static_cast<std::size_t>(k)][b];
          p.idx = {mp.y[static_cast<std::size_t>(k)][b]};
          p.val = {-1.0};
          p.cnst = blk.y_max;
          p.m_slack = blk.y_max;
          pending_.push_back(p);
        }
      }
    }
  }

  void add_balances() {
    const auto& mp = model_.map;
    for (int k = 0; k < work_.n_areas(); ++k) {
      const auto& area = work_.areas[static_cast<std::size_t>(k)];
      MilpModel::Row rp, rr;
      rp.name = "bal_p" + num(k);
      rr.name = "bal_r" + num(k);
      for (int j : area.bid_ids) {
        rp.idx.push_back(mp.pd[static_cast<std::size_t>(j)]);
        rp.val.push_back(1.0);
        rr.idx.push_back(mp.rd[static_cast<std::size_t>(j)]);
        rr.val.push_back(1.0);
      }
      for (std::size_t b = 0; b < area.blocks.size(); ++b) {
        rp.idx.push_back(mp.x[static_cast<std::size_t>(k)][b]);
        rp.val.push_back(-1.0);
        rr.idx.push_back(mp.y[static_cast<std::size_t>(k)][b]);
        rr.val.push_back(-1.0);
      }
      rp.lo = rp.hi = 0.0;
      rr.lo = rr.hi = 0.0;
      model_.add_row(std::move(rp));
      model_.add_row(std::move(rr));
    }
  }

  void add_variant_rows() {
    const auto& mp = model_.map;
    if (opt_.variant == Variant::kNonprofit) {
      for (int k = 0; k < work_.n_areas(); ++k) {
        const auto& area = work_.areas[static_cast<std::size_t>(k)];
        {
          MilpModel::Row r;  // alpha_k = pi_{bus_k}
          r.name = "nonprofit_a" + num(k);
          r.idx.push_back(mp.alpha[static_cast<std::size_t>(k)]);
          r.val.push_back(1.0);
          add_price_terms(r, area.bus, -1.0);
          r.lo = r.hi = 0.0;
          model_.add_row(std::move(r));
        }
        {
          MilpModel::Row r;  // beta_k = nu
          r.name = "nonprofit_b" + num(k);
          r.idx = {mp.beta[static_cast<std::size_t>(k)], mp.nu};
          r.val = {1.0, -1.0};
          r.lo = r.hi = 0.0;
          model_.add_row(std::move(r));
        }
      }
    } else if (opt_.variant == Variant::kEqualPrice) {
      for (int k = 0; k + 1 < work_.n_areas(); ++k) {
        MilpModel::Row r;
        r.name = "eqprice" + num(k);
        r.idx = {mp.alpha[static_cast<std::size_t>(k)], mp.alpha[static_cast<std::size_t>(k + 1)]};
        r.val = {1.0, -1.0};
        r.lo = r.hi = 0.0;
        model_.add_row(std::move(r));
      }
    }
  }

  /// Emits s <= m_slack (1 - z), u <= m_dual z and the binary for every
  /// staged pair. Pairs whose slack is structurally zero need no binary: the
  /// primal system already forces s = 0, so the dual stays free up to its
  /// bound. Those pairs keep an audit record with no binary attached.
  void linearize_complementarity() {
    for (auto& p : pending_) {
      MilpModel::PairAudit audit;
      audit.name = p.name;
      audit.group = p.group;
      audit.dual_var = p.dual_var;
      audit.m_dual = model_.var_hi[static_cast<std::size_t>(p.dual_var)];
      audit.m_slack = std::max(0.0, p.m_slack);
      if (audit.m_slack <= 1e-12) {
        model_.pairs.push_back(audit);
        continue;
      }
      int z = model_.add_binary("z_" + p.name, p.group);
      audit.binary_var = z;
      {
        MilpModel::Row r;  // s + M z <= M  (s expressed via its variable part)
        r.name = "cs_s_" + p.name;
        r.idx = p.idx;
        r.val = p.val;
        r.idx.push_back(z);
        r.val.push_back(audit.m_slack);
        r.lo = -kInf;
        r.hi = audit.m_slack - p.cnst;
        audit.slack_row = model_.add_row(std::move(r));
      }
      {
        MilpModel::Row r;  // u - M z <= 0
        r.name = "cs_u_" + p.name;
        r.idx = {p.dual_var, z};
        r.val = {1.0, -audit.m_dual};
        r.lo = -kInf;
        r.hi = 0.0;
        model_.add_row(std::move(r));
      }
      model_.pairs.push_back(audit);
    }
  }

  /// The linearized objective: customer-side strong duality substitutes the
  /// retail revenue, wholesale strong duality substitutes the wholesale
  /// charges. Every strategic bid's own box-dual terms cancel; rival and
  /// generator dual terms remain. Coefficients accumulate additively.
  void build_objective() {
    model_.maximize = true;
    const auto& mp = model_.map;

    for (int k = 0; k < work_.n_areas(); ++k) {
      const auto& area = work_.areas[static_cast<std::size_t>(k)];
      for (std::size_t b = 0; b < area.blocks.size(); ++b) {
        const auto& blk = area.blocks[b];
        model_.add_obj(mp.x[static_cast<std::size_t>(k)][b], blk.benefit_price);
        model_.add_obj(mp.y[static_cast<std::size_t>(k)][b], -blk.reserve_cost_price);
        model_.add_obj(mp.gamma_lo[static_cast<std::size_t>(k)][b], blk.x_min);
        model_.add_obj(mp.gamma_hi[static_cast<std::size_t>(k)][b], -blk.x_max);
        model_.add_obj(mp.zeta_hi[static_cast<std::size_t>(k)][b], -blk.y_max);
      }
    }

    for (int j = 0; j < work_.n_bids(); ++j) {
      const auto& b = work_.lse_bids[static_cast<std::size_t>(j)];
      if (!b.strategic) {
        model_.add_obj(mp.pd[static_cast<std::size_t>(j)], b.energy_price);
        model_.add_obj(mp.rd[static_cast<std::size_t>(j)], -b.reserve_price);
      }
    }
    for (int i = 0; i < work_.n_gens(); ++i) {
      const auto& o = work_.gen_offers[static_cast<std::size_t>(i)];
      model_.add_obj(mp.pg[static_cast<std::size_t>(i)], -o.energy_price);
      model_.add_obj(mp.rg[static_cast<std::size_t>(i)], -o.reserve_price);
    }
    for (int ell = 0; ell < work_.n_lines(); ++ell) {
      double fbar = work_.lines[static_cast<std::size_t>(ell)].flow_limit;
      model_.add_obj(mp.mu_lo[static_cast<std::size_t>(ell)], -fbar);
      model_.add_obj(mp.mu_hi[static_cast<std::size_t>(ell)], -fbar);
    }
    model_.add_obj(mp.nu, work_.reserve_req);
    for (int i = 0; i < work_.n_gens(); ++i) {
      const auto& o = work_.gen_offers[static_cast<std::size_t>(i)];
      model_.add_obj(mp.rho_g_lo[static_cast<std::size_t>(i)], o.p_min);
      model_.add_obj(mp.rho_g_hi[static_cast<std::size_t>(i)], -o.p_max);
      model_.add_obj(mp.eta_g_hi[static_cast<std::size_t>(i)], -o.r_max);
    }
    for (int j = 0; j < work_.n_bids(); ++j) {
      const auto& b = work_.lse_bids[static_cast<std::size_t>(j)];
      model_.add_obj(mp.rho_d_lo[static_cast<std::size_t>(j)], b.p_min);
      model_.add_obj(mp.rho_d_hi[static_cast<std::size_t>(j)], -b.p_max);
      model_.add_obj(mp.eta_d_hi[static_cast<std::size_t>(j)], -b.r_max);
      if (b.strategic) {
        model_.add_obj(mp.rho_d_lo[static_cast<std::size_t>(j)], -b.p_min);
        model_.add_obj(mp.rho_d_hi[static_cast<std::size_t>(j)], b.p_max);
        model_.add_obj(mp.eta_d_hi[static_cast<std::size_t>(j)], b.r_max);
      }
    }
  }

  JointBuildOptions opt_;
  Case work_;
  IsfMatrix isf_;
  LossFactors lf_;
  ResolvedBigM mm_;
  std::vector<int> strategic_;
  MilpModel model_;
  std::vector<int> flow_rows_;
  std::vector<double> alpha_ub_, alpha_lb_, beta_ub_;
  std::vector<joint_detail::PendingPair> pending_;
};

inline MilpModel build_joint_milp(const Case& c, Variant variant) {
  JointBuildOptions opt;
  opt.variant = variant;
  return JointBuilder(c, opt).build();
}

inline MilpModel build_joint_milp(const Case& c, const JointBuildOptions& opt) {
  return JointBuilder(c, opt).build();
}

}  // namespace trimarket
