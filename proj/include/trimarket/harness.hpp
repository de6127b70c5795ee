#pragma once

#include <algorithm>
#include <atomic>
#include <cmath>
#include <cstdio>
#include <sstream>
#include <string>
#include <thread>
#include <vector>

#include "json.hpp"
#include "trimarket/case_io.hpp"
#include "trimarket/euc.hpp"
#include "trimarket/joint_solve.hpp"
#include "trimarket/kkt.hpp"

namespace trimarket {

// ---------------------------------------------------------------------------
// Reports
// ---------------------------------------------------------------------------

namespace harness_detail {

inline std::string num3(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.3f", v);
  return buf;
}

inline std::string num6(double v) {
  char buf[48];
  std::snprintf(buf, sizeof(buf), "%.6f", v);
  return buf;
}

inline std::string pad(const std::string& s, std::size_t w) {
  if (s.size() >= w) return s;
  return std::string(w - s.size(), ' ') + s;
}

}  // namespace harness_detail

/// Table-style human-readable summary of one solve.
inline std::string report_text(const Case& c, const JointResult& r, double runtime_s) {
  using harness_detail::num3;
  using harness_detail::pad;
  std::ostringstream out;
  out << "variant: " << to_string(r.variant) << "   status: " << to_string(r.status)
      << "   gap: " << r.gap << "   nodes: " << r.nodes << "\n";
  const int n = c.n_areas();
  out << pad("area", 14);
  for (int k = 0; k < n; ++k) out << pad("C" + std::to_string(k + 1), 12);
  out << "\n";
  auto row = [&](const std::string& label, const std::vector<double>& vals) {
    out << pad(label, 14);
    for (double v : vals) out << pad(num3(v), 12);
    out << "\n";
  };
  row("alpha* $/MWh", r.alpha);
  row("beta* $/MW", r.beta);
  std::vector<double> ad(r.bid_energy), bd(r.bid_reserve), pi;
  ad.resize(static_cast<std::size_t>(n), 0.0);
  bd.resize(static_cast<std::size_t>(n), 0.0);
  for (int k = 0; k < n; ++k)
    pi.push_back(r.clearing.lmp[static_cast<std::size_t>(c.areas[static_cast<std::size_t>(k)].bus - 1)]);
  row("a_d* $/MWh", ad);
  row("b_d* $/MW", bd);
  row("pi* $/MWh", pi);
  out << pad("nu $/MW", 14) << pad(num3(r.clearing.nu), 12) << "\n";
  out << pad("profit $", 14) << pad(num3(r.profit), 12) << "\n";
  out << pad("welfare $", 14) << pad(num3(r.welfare_wem), 12) << "  (bid-valued)\n";
  out << pad("welfare+ $", 14) << pad(num3(r.welfare_total), 12) << "  (plus customer surplus)\n";
  out << pad("runtime s", 14) << pad(num3(runtime_s), 12) << "\n";
  if (!r.duals_at_bound.empty()) {
    out << "audit: duals at bound:";
    for (const auto& s : r.duals_at_bound) out << " " << s;
    out << "\n";
  }
  for (const auto& s : r.audit_log) out << "audit: " << s << "\n";
  return out.str();
}

inline void csv_header(std::ostringstream& out, const Case& c, bool with_offset) {
  if (with_offset) out << "offset,";
  out << "status,profit,welfare,welfare_total,nu,gap";
  for (int k = 0; k < c.n_areas(); ++k) out << ",alpha" << (k + 1);
  for (int k = 0; k < c.n_areas(); ++k) out << ",beta" << (k + 1);
  for (std::size_t s = 0; s < c.strategic_bid_ids().size(); ++s)
    out << ",a_d" << (s + 1);
  for (std::size_t s = 0; s < c.strategic_bid_ids().size(); ++s)
    out << ",b_d" << (s + 1);
  for (int k = 0; k < c.n_areas(); ++k) out << ",pi" << (k + 1);
  out << "\n";
}

inline void csv_row(std::ostringstream& out, const Case& c, const JointResult& r) {
  using harness_detail::num6;
  out << to_string(r.status) << "," << num6(r.profit) << "," << num6(r.welfare_wem) << ","
      << num6(r.welfare_total) << "," << num6(r.clearing.nu) << "," << num6(r.gap);
  for (double v : r.alpha) out << "," << num6(v);
  for (double v : r.beta) out << "," << num6(v);
  for (double v : r.bid_energy) out << "," << num6(v);
  for (double v : r.bid_reserve) out << "," << num6(v);
  for (int k = 0; k < c.n_areas(); ++k)
    out << ","
        << num6(r.clearing.lmp[static_cast<std::size_t>(c.areas[static_cast<std::size_t>(k)].bus - 1)]);
  out << "\n";
}

/// Single-solve CSV (header plus one row).
inline std::string report_csv(const Case& c, const JointResult& r) {
  std::ostringstream out;
  csv_header(out, c, false);
  csv_row(out, c, r);
  return out.str();
}

/// Machine-readable result document consumed by the validation command.
inline std::string result_json(const Case& c, const JointResult& r) {
  using nlohmann::json;
  json doc;
  doc["variant"] = to_string(r.variant);
  doc["status"] = to_string(r.status);
  doc["objective"] = r.objective;
  doc["profit"] = r.profit;
  doc["welfare"] = r.welfare_wem;
  doc["welfare_total"] = r.welfare_total;
  doc["gap"] = r.gap;
  doc["strategic_ids"] = r.strategic_ids;
  doc["bid_energy"] = r.bid_energy;
  doc["bid_reserve"] = r.bid_reserve;
  doc["alpha"] = r.alpha;
  doc["beta"] = r.beta;
  json cl;
  cl["p_g"] = r.clearing.p_g;
  cl["p_d"] = r.clearing.p_d;
  cl["r_g"] = r.clearing.r_g;
  cl["r_d"] = r.clearing.r_d;
  cl["lambda"] = r.clearing.lambda;
  cl["mu_lo"] = r.clearing.mu_lo;
  cl["mu_hi"] = r.clearing.mu_hi;
  cl["nu"] = r.clearing.nu;
  cl["rho_g_lo"] = r.clearing.rho_g_lo;
  cl["rho_g_hi"] = r.clearing.rho_g_hi;
  cl["eta_g_lo"] = r.clearing.eta_g_lo;
  cl["eta_g_hi"] = r.clearing.eta_g_hi;
  cl["rho_d_lo"] = r.clearing.rho_d_lo;
  cl["rho_d_hi"] = r.clearing.rho_d_hi;
  cl["eta_d_lo"] = r.clearing.eta_d_lo;
  cl["eta_d_hi"] = r.clearing.eta_d_hi;
  cl["lmp"] = r.clearing.lmp;
  cl["objective"] = r.clearing.objective;
  doc["clearing"] = std::move(cl);
  json resp = json::array();
  for (const auto& a : r.responses) {
    json ar;
    ar["x"] = a.x;
    ar["y"] = a.y;
    ar["gamma_lo"] = a.gamma_lo;
    ar["gamma_hi"] = a.gamma_hi;
    ar["zeta_lo"] = a.zeta_lo;
    ar["zeta_hi"] = a.zeta_hi;
    ar["objective"] = a.objective;
    resp.push_back(std::move(ar));
  }
  doc["responses"] = std::move(resp);
  (void)c;
  return doc.dump(2) + "\n";
}

/// Parses a result document back into a JointResult shell (fields used by
/// validation).
inline JointResult result_from_json(const std::string& text) {
  using nlohmann::json;
  json doc = json::parse(text);
  JointResult r;
  r.variant = variant_from_string(doc.at("variant").get<std::string>());
  r.objective = doc.at("objective").get<double>();
  r.profit = doc.at("profit").get<double>();
  r.welfare_wem = doc.at("welfare").get<double>();
  r.welfare_total = doc.at("welfare_total").get<double>();
  r.gap = doc.at("gap").get<double>();
  r.strategic_ids = doc.at("strategic_ids").get<std::vector<int>>();
  r.bid_energy = doc.at("bid_energy").get<std::vector<double>>();
  r.bid_reserve = doc.at("bid_reserve").get<std::vector<double>>();
  r.alpha = doc.at("alpha").get<std::vector<double>>();
  r.beta = doc.at("beta").get<std::vector<double>>();
  const json& cl = doc.at("clearing");
  r.clearing.p_g = cl.at("p_g").get<std::vector<double>>();
  r.clearing.p_d = cl.at("p_d").get<std::vector<double>>();
  r.clearing.r_g = cl.at("r_g").get<std::vector<double>>();
  r.clearing.r_d = cl.at("r_d").get<std::vector<double>>();
  r.clearing.lambda = cl.at("lambda").get<double>();
  r.clearing.mu_lo = cl.at("mu_lo").get<std::vector<double>>();
  r.clearing.mu_hi = cl.at("mu_hi").get<std::vector<double>>();
  r.clearing.nu = cl.at("nu").get<double>();
  r.clearing.rho_g_lo = cl.at("rho_g_lo").get<std::vector<double>>();
  r.clearing.rho_g_hi = cl.at("rho_g_hi").get<std::vector<double>>();
  r.clearing.eta_g_lo = cl.at("eta_g_lo").get<std::vector<double>>();
  r.clearing.eta_g_hi = cl.at("eta_g_hi").get<std::vector<double>>();
  r.clearing.rho_d_lo = cl.at("rho_d_lo").get<std::vector<double>>();
  r.clearing.rho_d_hi = cl.at("rho_d_hi").get<std::vector<double>>();
  r.clearing.eta_d_lo = cl.at("eta_d_lo").get<std::vector<double>>();
  r.clearing.eta_d_hi = cl.at("eta_d_hi").get<std::vector<double>>();
  r.clearing.lmp = cl.at("lmp").get<std::vector<double>>();
  r.clearing.objective = cl.at("objective").get<double>();
  for (const json& ar : doc.at("responses")) {
    AreaResponse a;
    a.x = ar.at("x").get<std::vector<double>>();
    a.y = ar.at("y").get<std::vector<double>>();
    a.gamma_lo = ar.at("gamma_lo").get<std::vector<double>>();
    a.gamma_hi = ar.at("gamma_hi").get<std::vector<double>>();
    a.zeta_lo = ar.at("zeta_lo").get<std::vector<double>>();
    a.zeta_hi = ar.at("zeta_hi").get<std::vector<double>>();
    a.objective = ar.at("objective").get<double>();
    r.responses.push_back(std::move(a));
  }
  r.status = SolveStatus::kOptimal;
  return r;
}

// ---------------------------------------------------------------------------
// Validation of a solve result against its case
// ---------------------------------------------------------------------------

struct ValidationOutcome {
  bool pass = true;
  std::vector<std::string> lines;

  void check(const std::string& name, double residual, double tol) {
    bool ok = residual <= tol;
    pass = pass && ok;
    lines.push_back(std::string(ok ? "[ok]   " : "[FAIL] ") + name +
                    "  residual " + std::to_string(residual));
  }
  void warn(const std::string& name, const std::string& detail) {
    lines.push_back("[warn] " + name + "  " + detail);
  }
};

/// Re-derives every invariant of a stored result: both optimality systems,
/// the objective/profit identity, the balances, embedded optimality against
/// fresh single-level solves, and (in uncongested lossless cases) whether
/// each retail energy price sits on a best-response breakpoint.
inline ValidationOutcome validate_result(const Case& original, const JointResult& r) {
  ValidationOutcome out;
  const Case c = joint_detail::working_case_for(original, r.variant);

  BidPrices bids = BidPrices::from_case(c);
  for (std::size_t s = 0; s < r.strategic_ids.size(); ++s) {
    bids.energy[static_cast<std::size_t>(r.strategic_ids[s])] = r.bid_energy[s];
    bids.reserve[static_cast<std::size_t>(r.strategic_ids[s])] = r.bid_reserve[s];
  }

  KktReport wem = wem_kkt_residuals(c, bids, r.clearing);
  out.check("wholesale optimality system", wem.max_any(), 1e-6);
  double euc_max = 0.0;
  for (int k = 0; k < c.n_areas(); ++k)
    euc_max = std::max(euc_max,
                       euc_kkt_residuals(c.areas[static_cast<std::size_t>(k)],
                                         r.alpha[static_cast<std::size_t>(k)],
                                         r.beta[static_cast<std::size_t>(k)],
                                         r.responses[static_cast<std::size_t>(k)])
                           .max_any());
  out.check("customer optimality systems", euc_max, 1e-6);

  // Balances between wholesale purchases and customer responses.
  double bal = 0.0;
  for (int k = 0; k < c.n_areas(); ++k) {
    const auto& area = c.areas[static_cast<std::size_t>(k)];
    double pd = 0.0, rd = 0.0;
    for (int j : area.bid_ids) {
      pd += r.clearing.p_d[static_cast<std::size_t>(j)];
      rd += r.clearing.r_d[static_cast<std::size_t>(j)];
    }
    bal = std::max(bal, std::fabs(pd - r.responses[static_cast<std::size_t>(k)].total_energy()));
    bal = std::max(bal, std::fabs(rd - r.responses[static_cast<std::size_t>(k)].total_reserve()));
  }
  out.check("energy/reserve balances", bal, 1e-6);

  // Profit identity against the stored profit value.
  double profit = 0.0;
  for (int k = 0; k < c.n_areas(); ++k) {
    const auto& area = c.areas[static_cast<std::size_t>(k)];
    double pi_k = r.clearing.lmp[static_cast<std::size_t>(area.bus - 1)];
    for (int j : area.bid_ids)
      profit += (r.alpha[static_cast<std::size_t>(k)] - pi_k) * r.clearing.p_d[static_cast<std::size_t>(j)] +
                (r.clearing.nu - r.beta[static_cast<std::size_t>(k)]) * r.clearing.r_d[static_cast<std::size_t>(j)];
  }
  out.check("profit identity", std::fabs(profit - r.profit) / (1.0 + std::fabs(profit)), 1e-6);

  // Embedded optimality re-solves.
  try {
    WemClearing ref = clear_wem(c, bids);
    out.check("embedded clearing optimality",
              std::fabs(ref.objective - r.clearing.objective) / (1.0 + std::fabs(ref.objective)),
              1e-6);
  } catch (const std::exception&) {
    out.check("embedded clearing optimality", 1.0, 1e-6);
  }
  double resp_gap = 0.0;
  for (int k = 0; k < c.n_areas(); ++k) {
    AreaResponse ref = area_response(r.alpha[static_cast<std::size_t>(k)],
                                     r.beta[static_cast<std::size_t>(k)],
                                     c.areas[static_cast<std::size_t>(k)]);
    resp_gap = std::max(resp_gap,
                        std::fabs(ref.objective - r.responses[static_cast<std::size_t>(k)].objective) /
                            (1.0 + std::fabs(ref.objective)));
  }
  out.check("embedded response optimality", resp_gap, 1e-6);

  // Breakpoint property: warning-level, only meaningful without congestion
  // or losses.
  bool uncongested = true;
  for (std::size_t l = 0; l < r.clearing.mu_lo.size(); ++l)
    if (r.clearing.mu_lo[l] > 1e-7 || r.clearing.mu_hi[l] > 1e-7) uncongested = false;
  bool lossless = true;
  for (double v : loss_factors(c).values)
    if (v != 0.0) lossless = false;
  if (uncongested && lossless) {
    for (int k = 0; k < c.n_areas(); ++k) {
      auto bp = alpha_breakpoints(c.areas[static_cast<std::size_t>(k)], c.caps);
      double dist = 1e300;
      for (double v : bp) dist = std::min(dist, std::fabs(v - r.alpha[static_cast<std::size_t>(k)]));
      if (dist > 1e-6)
        out.warn("retail price off breakpoint",
                 "area " + std::to_string(k + 1) + " alpha " +
                     std::to_string(r.alpha[static_cast<std::size_t>(k)]) +
                     " is " + std::to_string(dist) + " from the nearest breakpoint");
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Sweeps
// ---------------------------------------------------------------------------

struct SweepSpec {
  enum class Target { kAlphaOffset, kEucBenefitOffset, kRivalBidOffset };
  Target target = Target::kAlphaOffset;
  std::vector<double> grid;  // sorted offsets
  Variant variant = Variant::kFull;  // full or no-reserve
  std::uint64_t fixed_seed = 0;      // recorded for provenance
  bool all_areas = true;             // offset scope for benefit sweeps
  int area = -1;                     // the single area when not all_areas
};

inline SweepSpec::Target sweep_target_from_string(const std::string& s) {
  if (s == "alpha-offset" || s == "alpha_offset") return SweepSpec::Target::kAlphaOffset;
  if (s == "euc-benefit-offset" || s == "euc_benefit_offset")
    return SweepSpec::Target::kEucBenefitOffset;
  if (s == "rival-bid-offset" || s == "rival_bid_offset")
    return SweepSpec::Target::kRivalBidOffset;
  throw std::invalid_argument("unknown sweep target: " + s);
}

struct SweepRow {
  double offset = 0.0;
  bool solved = false;
  std::string error;
  JointResult result;
};

/// Runs one grid point.
inline SweepRow sweep_point(const Case& c, const SweepSpec& spec, double offset,
                            const JointResult& base, const SolveJointOptions& opts) {
  SweepRow row;
  row.offset = offset;
  try {
    switch (spec.target) {
      case SweepSpec::Target::kAlphaOffset: {
        // Energy prices pinned at their optimum plus the offset; reserve
        // prices and bids stay free and the market re-clears.
        JointBuildOptions bo;
        bo.variant = spec.variant;
        std::vector<double> fa = base.alpha;
        for (std::size_t k = 0; k < fa.size(); ++k)
          if (spec.all_areas || static_cast<int>(k) == spec.area) fa[k] += offset;
        bo.fix_alpha = fa;
        row.result = solve_joint(c, bo, opts);
        break;
      }
      case SweepSpec::Target::kEucBenefitOffset: {
        Case mod = c;
        for (int k = 0; k < mod.n_areas(); ++k) {
          if (!spec.all_areas && k != spec.area) continue;
          for (auto& blk : mod.areas[static_cast<std::size_t>(k)].blocks)
            blk.benefit_price += offset;
        }
        row.result = solve_joint(mod, spec.variant, opts);
        break;
      }
      case SweepSpec::Target::kRivalBidOffset: {
        Case mod = c;
        for (auto& b : mod.lse_bids)
          if (!b.strategic) b.energy_price += offset;
        row.result = solve_joint(mod, spec.variant, opts);
        break;
      }
    }
    row.solved = row.result.status == SolveStatus::kOptimal ||
                 row.result.status == SolveStatus::kIterationLimit;
    if (!row.solved) row.error = to_string(row.result.status);
  } catch (const std::exception& e) {
    row.solved = false;
    row.error = e.what();
  }
  return row;
}

/// Runs the whole grid (optionally with a pool of worker threads, one grid
/// point each) and renders the CSV; rows are ordered by grid index.
inline std::string run_sweep_csv(const Case& c, const SweepSpec& spec,
                                 const SolveJointOptions& opts, int workers = 1) {
  if (spec.grid.empty()) throw std::invalid_argument("sweep: empty grid");
  if (!std::is_sorted(spec.grid.begin(), spec.grid.end()))
    throw std::invalid_argument("sweep: grid must be sorted");

  JointResult base;
  if (spec.target == SweepSpec::Target::kAlphaOffset) {
    base = solve_joint(c, spec.variant, opts);
    if (base.status != SolveStatus::kOptimal)
      throw std::runtime_error("sweep: base solve failed: " +
                               std::string(to_string(base.status)));
  }

  std::vector<SweepRow> rows(spec.grid.size());
  if (workers <= 1) {
    for (std::size_t i = 0; i < spec.grid.size(); ++i)
      rows[i] = sweep_point(c, spec, spec.grid[i], base, opts);
  } else {
    std::vector<std::thread> pool;
    std::atomic<std::size_t> next{0};
    for (int w = 0; w < workers; ++w)
      pool.emplace_back([&] {
        while (true) {
          std::size_t i = next.fetch_add(1);
          if (i >= spec.grid.size()) return;
          rows[i] = sweep_point(c, spec, spec.grid[i], base, opts);
        }
      });
    for (auto& t : pool) t.join();
  }

  std::ostringstream out;
  csv_header(out, c, true);
  for (const auto& row : rows) {
    if (row.solved) {
      out << harness_detail::num6(row.offset) << ",";
      csv_row(out, c, row.result);
    } else {
      out << harness_detail::num6(row.offset) << ",error:" << row.error;
      out << "\n";
    }
  }
  return out.str();
}

}  // namespace trimarket
