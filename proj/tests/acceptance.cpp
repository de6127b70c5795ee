// Acceptance suite: every criterion prints one pass/fail line; the process
// exits nonzero if any selected criterion fails.
//
//   acceptance [--only 1,2,3] [--verbose]

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <cstring>
#include <map>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "support.hpp"
#include "trimarket/case_gen.hpp"
#include "trimarket/harness.hpp"
#include "trimarket/joint_solve.hpp"
#include "trimarket/mps.hpp"
#include "trimarket/network.hpp"

using namespace trimarket;
using trimarket::testsupport::TinyOptions;
using trimarket::testsupport::tiny_case;

namespace {

struct Runner {
  std::set<int> only;
  bool verbose = false;
  int failures = 0;

  bool selected(int n) const { return only.empty() || only.count(n) > 0; }

  void report(int n, bool pass, const std::string& what, const std::string& detail) {
    std::printf("[%s] criterion %2d: %s%s%s\n", pass ? "PASS" : "FAIL", n, what.c_str(),
                detail.empty() ? "" : " -- ", detail.c_str());
    std::fflush(stdout);
    if (!pass) ++failures;
  }
};

double now_s() {
  using clock = std::chrono::steady_clock;
  static const clock::time_point t0 = clock::now();
  return std::chrono::duration<double>(clock::now() - t0).count();
}

std::vector<Case> small_instances(int count) {
  std::vector<Case> cases;
  for (int i = 0; i < count; ++i) {
    TinyOptions to;
    to.with_reserve = (i % 3) != 0;
    to.two_bus = (i % 2) == 0;
    to.congested = (i % 4) == 0;
    to.blocks = 1 + (i % 3);
    to.rival = (i % 5) == 0;
    cases.push_back(tiny_case(1000u + static_cast<std::uint64_t>(i), to));
  }
  return cases;
}

// --- criterion bodies ------------------------------------------------------

// 1: tiny-scale agreement between branch and bound and exhaustive search
bool crit_tiny_oracle(std::string& detail) {
  double t0 = now_s();
  MilpOptions opt;
  opt.gap = 1e-9;
  int checked = 0;
  double worst = 0.0;
  for (int i = 0; i < 50; ++i) {
    TinyOptions to;
    to.two_bus = (i % 2) == 0;
    to.blocks = 1 + (i % 2);
    to.congested = (i % 3) == 0;
    Case c = tiny_case(100u + static_cast<std::uint64_t>(i), to);
    MilpModel m = build_joint_milp(c, Variant::kFull);
    if (m.num_binaries() > 12) {
      detail = "instance exceeds 12 binaries";
      return false;
    }
    MilpSolution bb = solve_milp(m, opt);
    MilpSolution ref = brute_force_milp(m, 12, opt);
    if (bb.status != SolveStatus::kOptimal || ref.status != SolveStatus::kOptimal) {
      detail = "solve failed on instance " + std::to_string(i);
      return false;
    }
    double diff = std::fabs(bb.objective - ref.objective);
    worst = std::max(worst, diff);
    if (diff > 1e-6 * (1.0 + std::fabs(ref.objective))) {
      detail = "objective mismatch " + std::to_string(diff) + " on instance " + std::to_string(i);
      return false;
    }
    ++checked;
  }
  std::ostringstream ss;
  ss << checked << " instances, worst diff " << worst << ", " << (now_s() - t0) << " s";
  detail = ss.str();
  return true;
}

// 2 and 3: optimality-system residuals, audits and the objective identity
// across >= 100 seeded full solves.
bool crit_identity_and_kkt(std::string& detail, bool check_kkt,
                           std::vector<std::pair<Case, JointResult>>* keep) {
  double t0 = now_s();
  auto cases = small_instances(100);
  double worst_id = 0.0, worst_kkt = 0.0;
  int audits = 0;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    JointResult r;
    try {
      r = solve_joint(cases[i], Variant::kFull);
    } catch (const std::exception& e) {
      detail = std::string("solve threw: ") + e.what();
      return false;
    }
    if (r.status != SolveStatus::kOptimal) {
      detail = "instance " + std::to_string(i) + " not optimal";
      return false;
    }
    double id = std::fabs(r.objective - r.profit) / (1.0 + std::fabs(r.profit));
    worst_id = std::max(worst_id, id);
    worst_kkt = std::max(worst_kkt, std::max(r.kkt_wem_max, r.kkt_euc_max));
    audits += static_cast<int>(r.duals_at_bound.size());
    if (keep && i < 30) keep->push_back({cases[i], r});
  }
  std::ostringstream ss;
  if (check_kkt) {
    ss << "worst residual " << worst_kkt << ", " << audits << " duals at bound";
    detail = ss.str();
    return worst_kkt <= 1e-6 && audits == 0;
  }
  ss << "100 solves, worst identity residual " << worst_id << ", " << (now_s() - t0) << " s";
  detail = ss.str();
  return worst_id <= 1e-6;
}

// 4: embedded clearing/response optimality against the standalone solvers
bool crit_embedded(const std::vector<std::pair<Case, JointResult>>& solved,
                   std::string& detail) {
  double worst = 0.0;
  for (const auto& [c, r] : solved) {
    BidPrices bids = BidPrices::from_case(c);
    for (std::size_t s = 0; s < r.strategic_ids.size(); ++s) {
      bids.energy[static_cast<std::size_t>(r.strategic_ids[s])] = r.bid_energy[s];
      bids.reserve[static_cast<std::size_t>(r.strategic_ids[s])] = r.bid_reserve[s];
    }
    WemClearing ref = clear_wem(c, bids);
    worst = std::max(worst, std::fabs(ref.objective - r.clearing.objective) /
                                (1.0 + std::fabs(ref.objective)));
    for (int k = 0; k < c.n_areas(); ++k) {
      AreaResponse ar = area_response(r.alpha[static_cast<std::size_t>(k)],
                                      r.beta[static_cast<std::size_t>(k)],
                                      c.areas[static_cast<std::size_t>(k)]);
      worst = std::max(worst, std::fabs(ar.objective - r.responses[static_cast<std::size_t>(k)].objective) /
                                  (1.0 + std::fabs(ar.objective)));
    }
  }
  detail = "worst relative objective gap " + std::to_string(worst) + " over " +
           std::to_string(solved.size()) + " instances";
  return worst <= 1e-6;
}

// 5: the regulated variant earns exactly nothing
bool crit_nonprofit(std::string& detail) {
  double worst = 0.0;
  auto cases = small_instances(20);
  cases.push_back(generate_case(GenSpec::ieee9_desk(), 42u));
  for (auto& c : cases) {
    JointResult r = solve_joint(c, Variant::kNonprofit);
    if (r.status != SolveStatus::kOptimal) {
      detail = "nonprofit solve not optimal";
      return false;
    }
    worst = std::max(worst, std::fabs(r.profit));
  }
  detail = "worst |profit| " + std::to_string(worst) + " over " +
           std::to_string(cases.size()) + " instances";
  return worst <= 1e-9;
}

// 6: the unconstrained problem dominates both constrained variants on
// congested instances
bool crit_dominance(std::string& detail) {
  for (std::uint64_t seed = 1; seed <= 5; ++seed) {
    Case c = generate_case(GenSpec::ieee9_desk_congested(), seed);
    JointResult full = solve_joint(c, Variant::kFull);
    JointResult eq = solve_joint(c, Variant::kEqualPrice);
    JointResult np = solve_joint(c, Variant::kNonprofit);
    if (full.status != SolveStatus::kOptimal || eq.status != SolveStatus::kOptimal ||
        np.status != SolveStatus::kOptimal) {
      detail = "a variant failed to solve on seed " + std::to_string(seed);
      return false;
    }
    double slack = 1e-6 * (1.0 + std::fabs(full.profit));
    if (full.profit < eq.profit - slack || full.profit < np.profit - slack) {
      detail = "dominance violated on seed " + std::to_string(seed) + ": full " +
               std::to_string(full.profit) + ", equal-price " + std::to_string(eq.profit) +
               ", nonprofit " + std::to_string(np.profit);
      return false;
    }
  }
  detail = "full >= equal-price and full >= nonprofit on 5 congested seeds";
  return true;
}

// 7: price-offset sweep shape on the desk-scale nine-bus case
bool crit_sweep_pattern(std::string& detail) {
  double t0 = now_s();
  Case c = generate_case(GenSpec::ieee9_desk(), 42u);
  SolveJointOptions opts;
  JointResult base = solve_joint(c, Variant::kFull, opts);
  if (base.status != SolveStatus::kOptimal) {
    detail = "base solve failed";
    return false;
  }
  std::vector<double> profits, welfare;
  for (int step = -10; step <= 10; ++step) {
    JointBuildOptions bo;
    bo.variant = Variant::kFull;
    std::vector<double> fa = base.alpha;
    for (auto& v : fa) v += step;
    bo.fix_alpha = fa;
    JointResult r = solve_joint(c, bo, opts);
    if (r.status != SolveStatus::kOptimal) {
      detail = "offset " + std::to_string(step) + " failed";
      return false;
    }
    profits.push_back(r.profit);
    // Transfer-invariant social surplus: retail and bid prices only move
    // money between parties, so customer surplus plus bid-valued market
    // welfare plus the LSE's profit is the welfare measure that can be
    // monotone in the posted price.
    welfare.push_back(r.welfare_total + r.profit);
  }
  double p0 = profits[10];
  double slack = 1e-6 * (1.0 + std::fabs(p0));
  for (double p : profits)
    if (p > p0 + slack) {
      detail = "profit " + std::to_string(p) + " beats the zero-offset profit " +
               std::to_string(p0);
      return false;
    }
  // plateau: the three largest offsets agree and stay positive
  double pa = profits[18], pb = profits[19], pc = profits[20];
  if (!(pa > 0.0 && pb > 0.0 && pc > 0.0) ||
      std::fabs(pa - pb) > 1e-6 * (1.0 + std::fabs(pa)) ||
      std::fabs(pb - pc) > 1e-6 * (1.0 + std::fabs(pb))) {
    detail = "no positive plateau: " + std::to_string(pa) + ", " + std::to_string(pb) + ", " +
             std::to_string(pc);
    return false;
  }
  for (std::size_t i = 1; i < welfare.size(); ++i)
    if (welfare[i] > welfare[i - 1] + 1e-6 * (1.0 + std::fabs(welfare[i - 1]))) {
      detail = "welfare increases at offset " + std::to_string(static_cast<int>(i) - 10);
      return false;
    }
  std::ostringstream ss;
  ss << "peak " << p0 << " at offset 0, plateau " << pc << ", welfare monotone, "
     << (now_s() - t0) << " s";
  detail = ss.str();
  return true;
}

// 8: retail energy prices sit on best-response breakpoints when uncongested
bool crit_breakpoints(std::string& detail) {
  int warnings = 0;
  for (std::uint64_t seed : {42u, 43u, 44u}) {
    Case c = generate_case(GenSpec::ieee9_desk(), seed);
    JointResult r = solve_joint(c, Variant::kFull);
    if (r.status != SolveStatus::kOptimal) {
      detail = "solve failed on seed " + std::to_string(seed);
      return false;
    }
    for (int k = 0; k < c.n_areas(); ++k) {
      auto bp = alpha_breakpoints(c.areas[static_cast<std::size_t>(k)], c.caps);
      double dist = 1e300, nearest = 0.0;
      for (double v : bp) {
        double dd = std::fabs(v - r.alpha[static_cast<std::size_t>(k)]);
        if (dd < dist) {
          dist = dd;
          nearest = v;
        }
      }
      if (dist > 1e-6) {
        // degenerate flat optimum: profit must not change at the breakpoint
        JointBuildOptions bo;
        bo.variant = Variant::kFull;
        std::vector<double> fa = r.alpha, fb = r.beta;
        fa[static_cast<std::size_t>(k)] = nearest;
        bo.fix_alpha = fa;
        bo.fix_beta = fb;
        JointResult rr = solve_joint(c, bo);
        if (rr.status != SolveStatus::kOptimal ||
            std::fabs(rr.profit - r.profit) > 1e-6 * (1.0 + std::fabs(r.profit))) {
          detail = "area " + std::to_string(k + 1) + " price " +
                   std::to_string(r.alpha[static_cast<std::size_t>(k)]) +
                   " off breakpoints and not profit-neutral";
          return false;
        }
        ++warnings;
      }
    }
  }
  detail = warnings == 0 ? "all retail prices on breakpoints"
                         : std::to_string(warnings) + " flat-optimum warnings";
  return true;
}

// 9: engine unit truths (hand-derived clearing, shift factors, LP duality)
bool crit_engine_truths(std::string& detail) {
  // two-bus congestion dispatch
  {
    Case c;
    c.buses = {{1}, {2}};
    c.slack_bus = 1;
    Line ln;
    ln.id = 1;
    ln.from_bus = 1;
    ln.to_bus = 2;
    ln.reactance = 0.1;
    ln.flow_limit = 60.0;
    c.lines.push_back(ln);
    c.gen_offers.push_back({1, 10.0, 0.0, 0.0, 200.0, 0.0});
    c.gen_offers.push_back({2, 30.0, 0.0, 0.0, 200.0, 0.0});
    LseBid b;
    b.bus = 2;
    b.energy_price = 100.0;
    b.p_min = 100.0;
    b.p_max = 100.0;
    c.lse_bids.push_back(b);
    WemClearing w = clear_wem(c, BidPrices::from_case(c));
    if (std::fabs(w.p_g[0] - 60.0) > 1e-6 || std::fabs(w.p_g[1] - 40.0) > 1e-6 ||
        std::fabs(w.lmp[0] - 10.0) > 1e-6 || std::fabs(w.lmp[1] - 30.0) > 1e-6) {
      detail = "two-bus congestion example off";
      return false;
    }
  }
  // ring shift factor
  {
    std::vector<Line> lines;
    for (int i = 0; i < 3; ++i) {
      Line l;
      l.id = i + 1;
      l.from_bus = i + 1;
      l.to_bus = (i + 1) % 3 + 1;
      l.reactance = 1.0;
      l.flow_limit = 100.0;
      lines.push_back(l);
    }
    IsfMatrix m = compute_isf(lines, 3, 1);
    if (std::fabs(m.values(0, 1) - (-2.0 / 3.0)) > 1e-9) {
      detail = "ring shift factor off";
      return false;
    }
  }
  // strong duality on 1000 random LPs
  SplitMix64 rng(424243u);
  double worst = 0.0;
  for (int trial = 0; trial < 1000; ++trial) {
    int n = 1 + static_cast<int>(rng.next_below(6));
    int mr = 1 + static_cast<int>(rng.next_below(6));
    Lp lp;
    lp.maximize = (rng.next_u64() & 1u) != 0;
    std::vector<double> x0;
    for (int j = 0; j < n; ++j) {
      double lo = rng.next_in(-5.0, 0.0);
      double hi = lo + rng.next_in(0.0, 8.0);
      lp.add_var("x", lo, hi, rng.next_in(-3.0, 3.0));
      x0.push_back(rng.next_in(lo, hi));
    }
    for (int i = 0; i < mr; ++i) {
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
    if (sol.status != SolveStatus::kOptimal) {
      detail = "random LP not optimal";
      return false;
    }
    double dual = 0.0;
    for (int i = 0; i < lp.num_rows(); ++i) {
      double y = sol.row_dual[static_cast<std::size_t>(i)];
      if (y == 0.0) continue;
      const auto& r = lp.rows[static_cast<std::size_t>(i)];
      dual += y * ((lp.maximize ? y < 0.0 : y > 0.0) ? r.lo : r.hi);
    }
    for (int j = 0; j < lp.num_vars(); ++j) {
      double dj = sol.reduced_cost[static_cast<std::size_t>(j)];
      if (dj == 0.0) continue;
      dual += dj * ((lp.maximize ? dj < 0.0 : dj > 0.0) ? lp.lo[static_cast<std::size_t>(j)]
                                                        : lp.hi[static_cast<std::size_t>(j)]);
    }
    worst = std::max(worst, std::fabs(dual - sol.objective) / (1.0 + std::fabs(sol.objective)));
  }
  if (worst > 1e-7) {
    detail = "worst duality gap " + std::to_string(worst);
    return false;
  }
  detail = "dispatch, shift factor and 1000 LP dualities verified (worst gap " +
           std::to_string(worst) + ")";
  return true;
}

// 10: byte determinism of sweep CSV and MPS export
bool crit_determinism(std::string& detail) {
  Case c1 = generate_case(GenSpec::ieee9_desk(), 77u);
  Case c2 = generate_case(GenSpec::ieee9_desk(), 77u);
  SweepSpec spec;
  spec.target = SweepSpec::Target::kEucBenefitOffset;
  spec.grid = {-1.0, 0.0, 1.0};
  std::string csv1 = run_sweep_csv(c1, spec, {});
  std::string csv2 = run_sweep_csv(c2, spec, {});
  if (csv1 != csv2) {
    detail = "sweep CSVs differ between runs";
    return false;
  }
  MpsDocument m1 = export_mps(build_joint_milp(c1, Variant::kFull));
  MpsDocument m2 = export_mps(build_joint_milp(c2, Variant::kFull));
  if (m1.mps != m2.mps || m1.name_map != m2.name_map) {
    detail = "MPS exports differ between runs";
    return false;
  }
  detail = "sweep CSV and MPS export byte-identical across runs";
  return true;
}

// 11: the full-size nine-bus instance builds, exports, and solves to 1%
bool crit_scale(std::string& detail) {
  double t0 = now_s();
  Case c = generate_case(GenSpec::ieee9_smallsys(), 7u);
  MilpModel m = build_joint_milp(c, Variant::kFull);
  if (m.num_binaries() != 415) {
    detail = "expected 415 binaries, built " + std::to_string(m.num_binaries());
    return false;
  }
  MpsDocument doc = export_mps(m);
  if (doc.mps.find("ENDATA") == std::string::npos || doc.mps.size() < 10000) {
    detail = "export looks malformed";
    return false;
  }
  SolveJointOptions opts;
  opts.milp.gap = 0.01;
  opts.milp.time_limit = 1800.0;
  JointResult r = solve_joint(c, Variant::kFull, opts);
  std::ostringstream ss;
  ss << "status " << to_string(r.status) << ", gap " << r.gap << ", nodes " << r.nodes << ", "
     << (now_s() - t0) << " s";
  detail = ss.str();
  return (r.status == SolveStatus::kOptimal ||
          r.status == SolveStatus::kIterationLimit) &&
         r.gap <= 0.01 + 1e-12;
}

}  // namespace

int main(int argc, char** argv) {
  Runner run;
  for (int i = 1; i < argc; ++i) {
    if (std::strcmp(argv[i], "--only") == 0 && i + 1 < argc) {
      std::istringstream in(argv[++i]);
      std::string tok;
      while (std::getline(in, tok, ',')) run.only.insert(std::stoi(tok));
    } else if (std::strcmp(argv[i], "--verbose") == 0) {
      run.verbose = true;
    }
  }

  std::string detail;
  std::vector<std::pair<Case, JointResult>> solved;

  if (run.selected(1)) {
    detail.clear();
    run.report(1, crit_tiny_oracle(detail), "tiny-scale oracle equivalence", detail);
  }
  bool need_solved = run.selected(2) || run.selected(3) || run.selected(4);
  if (need_solved) {
    detail.clear();
    bool id_ok = crit_identity_and_kkt(detail, false, &solved);
    if (run.selected(3)) run.report(3, id_ok, "objective-linearization identity", detail);
    if (run.selected(2)) {
      // residuals and audits were collected during the same solves
      double worst = 0.0;
      int audits = 0;
      for (const auto& [c, r] : solved) {
        (void)c;
        worst = std::max(worst, std::max(r.kkt_wem_max, r.kkt_euc_max));
        audits += static_cast<int>(r.duals_at_bound.size());
      }
      std::ostringstream ss;
      ss << "worst residual " << worst << ", " << audits << " duals left at bound";
      run.report(2, worst <= 1e-6 && audits == 0 && id_ok,
                 "optimality systems and big-M audit at incumbents", ss.str());
    }
    if (run.selected(4)) {
      detail.clear();
      run.report(4, crit_embedded(solved, detail), "embedded clearing/response optimality",
                 detail);
    }
  }
  if (run.selected(5)) {
    detail.clear();
    run.report(5, crit_nonprofit(detail), "nonprofit variant earns zero", detail);
  }
  if (run.selected(6)) {
    detail.clear();
    run.report(6, crit_dominance(detail), "variant dominance under congestion", detail);
  }
  if (run.selected(7)) {
    detail.clear();
    run.report(7, crit_sweep_pattern(detail), "price-offset sweep pattern", detail);
  }
  if (run.selected(8)) {
    detail.clear();
    run.report(8, crit_breakpoints(detail), "retail prices on breakpoints", detail);
  }
  if (run.selected(9)) {
    detail.clear();
    run.report(9, crit_engine_truths(detail), "clearing-engine unit truths", detail);
  }
  if (run.selected(10)) {
    detail.clear();
    run.report(10, crit_determinism(detail), "byte-level determinism", detail);
  }
  if (run.selected(11)) {
    detail.clear();
    run.report(11, crit_scale(detail), "full-size instance builds, exports, solves to 1%",
               detail);
  }

  return run.failures == 0 ? 0 : 1;
}
