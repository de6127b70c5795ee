#pragma once

#include <algorithm>
#include <chrono>
#include <cmath>
#include <condition_variable>
#include <mutex>
#include <queue>
#include <stdexcept>
#include <thread>
#include <vector>

#include "trimarket/milp_model.hpp"
#include "trimarket/simplex.hpp"

namespace trimarket {

struct MilpOptions {
  double gap = 1e-6;       // relative gap target
  double int_tol = 1e-6;   // binary integrality tolerance
  long node_limit = 50'000'000;
  double time_limit = kInf;  // seconds
  int workers = 1;           // >1 enables the shared-pool mode
  int heuristic_period = 64; // nodes between rounding-heuristic attempts
  bool record_history = false;
  SimplexOptions lp;
};

namespace bnb_detail {

struct Node {
  int parent = -1;
  int var = -1;   // fixed binary column (-1 for root)
  int val = 0;
  double bound_max = kInf;  // parent LP bound in max sense
  int depth = 0;
  std::vector<std::pair<int, int>> extra;  // reduced-cost fixings, subtree-valid
  // Parent basis at branch time; restored on pop so best-bound restarts do
  // not pay a long phase-1 walk from an unrelated subtree. Released once
  // the node is picked up.
  std::shared_ptr<BoundedSimplex::Basis> warm;
};

struct Shared {
  std::mutex mu;
  std::condition_variable cv;
  std::vector<Node> nodes;
  // open list keyed by (bound_max desc, node id asc)
  struct OpenCmp {
    const std::vector<Node>* nodes;
    bool operator()(int a, int b) const {
      const Node& na = (*nodes)[static_cast<std::size_t>(a)];
      const Node& nb = (*nodes)[static_cast<std::size_t>(b)];
      if (na.bound_max != nb.bound_max) return na.bound_max < nb.bound_max;
      return a > b;
    }
  };
  std::priority_queue<int, std::vector<int>, OpenCmp> open;
  bool have_incumbent = false;
  double inc_max = -kInf;
  std::vector<double> inc_x;
  double pruned_max = -kInf;  // sup of bounds discarded by gap pruning
  std::vector<double> active_bound_max;  // per worker; -inf when idle
  long node_count = 0;
  long lp_iterations = 0;
  int idle = 0;
  bool done = false;
  SolveStatus stop_status = SolveStatus::kOptimal;
  std::vector<double> bound_history, incumbent_history;

  explicit Shared(int workers)
      : open(OpenCmp{&nodes}), active_bound_max(static_cast<std::size_t>(workers), -kInf) {}

  double global_bound_max() const {
    double g = have_incumbent ? inc_max : -kInf;
    g = std::max(g, pruned_max);
    if (!open.empty()) g = std::max(g, nodes[static_cast<std::size_t>(open.top())].bound_max);
    for (double b : active_bound_max) g = std::max(g, b);
    return g;
  }
};

}  // namespace bnb_detail

/// Branch and bound over the model's binary columns with warm-started LP
/// relaxations. Depth-first plunging with best-bound restarts; incumbents
/// from integral relaxations and from a slack/dual rounding heuristic.
/// Deterministic in single-worker mode (fixed tie-breaking everywhere);
/// multi-worker solves share one node pool and return the same objective.
class BranchAndBound {
 public:
  BranchAndBound(const MilpModel& model, MilpOptions opt)
      : model_(model), opt_(opt), sense_(model.maximize ? 1.0 : -1.0) {
    if (opt_.workers < 1) opt_.workers = 1;
    // Branching priority: group rank, then declaration order.
    prio_.resize(model_.binaries.size());
    for (std::size_t i = 0; i < model_.binaries.size(); ++i) prio_[i] = static_cast<int>(i);
    std::stable_sort(prio_.begin(), prio_.end(), [&](int a, int b) {
      return static_cast<int>(model_.binaries[static_cast<std::size_t>(a)].group) <
             static_cast<int>(model_.binaries[static_cast<std::size_t>(b)].group);
    });
    rank_of_.assign(model_.binaries.size(), 0);
    for (std::size_t r = 0; r < prio_.size(); ++r) rank_of_[static_cast<std::size_t>(prio_[r])] = static_cast<int>(r);
    bin_index_of_var_.assign(static_cast<std::size_t>(model_.num_vars()), -1);
    for (std::size_t i = 0; i < model_.binaries.size(); ++i)
      bin_index_of_var_[static_cast<std::size_t>(model_.binaries[i].var)] = static_cast<int>(i);
    pair_of_var_.assign(static_cast<std::size_t>(model_.num_vars()), -1);
    for (std::size_t p = 0; p < model_.pairs.size(); ++p)
      if (model_.pairs[p].binary_var >= 0)
        pair_of_var_[static_cast<std::size_t>(model_.pairs[p].binary_var)] = static_cast<int>(p);
  }

  MilpSolution run() {
    bnb_detail::Shared sh(opt_.workers);
    sh.nodes.push_back(bnb_detail::Node{});  // root
    sh.nodes[0].bound_max = kInf;
    sh.open.push(0);
    start_ = std::chrono::steady_clock::now();

    if (opt_.workers == 1) {
      worker(sh, 0);
    } else {
      std::vector<std::thread> pool;
      for (int wkr = 0; wkr < opt_.workers; ++wkr)
        pool.emplace_back([&sh, wkr, this] { worker(sh, wkr); });
      for (auto& t : pool) t.join();
    }

    MilpSolution sol;
    sol.node_count = sh.node_count;
    sol.lp_iterations = sh.lp_iterations;
    if (opt_.record_history) {
      sol.bound_history = sh.bound_history;
      sol.incumbent_history = sh.incumbent_history;
    }
    if (!sh.have_incumbent) {
      sol.status = (sh.stop_status == SolveStatus::kOptimal) ? SolveStatus::kInfeasible
                                                             : sh.stop_status;
      return sol;
    }
    sol.x = sh.inc_x;
    sol.objective = sense_ * sh.inc_max;
    double bound_max = sh.done && sh.open.empty()
                           ? std::max(sh.inc_max, sh.pruned_max)
                           : sh.global_bound_max();
    sol.best_bound = sense_ * bound_max;
    sol.gap = std::max(0.0, (bound_max - sh.inc_max) / (1.0 + std::fabs(sh.inc_max)));
    sol.status = (sh.stop_status == SolveStatus::kOptimal) ? SolveStatus::kOptimal
                                                           : sh.stop_status;
    audit_dual_bounds(sol);
    return sol;
  }

 private:
  void audit_dual_bounds(MilpSolution& sol) const {
    if (sol.x.empty()) return;
    for (std::size_t p = 0; p < model_.pairs.size(); ++p) {
      const auto& pa = model_.pairs[p];
      if (pa.dual_var < 0 || pa.m_dual <= 0.0) continue;
      double u = sol.x[static_cast<std::size_t>(pa.dual_var)];
      if (u >= pa.m_dual * (1.0 - 1e-6) - 1e-9)
        sol.duals_at_bound.push_back(static_cast<int>(p));
    }
  }

  double elapsed() const {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - start_).count();
  }

  void apply_node(BoundedSimplex& lp, const bnb_detail::Shared& sh, int node_id) const {
    for (const auto& b : model_.binaries) lp.reset_var_bounds(b.var);
    int id = node_id;
    while (id >= 0) {
      const auto& nd = sh.nodes[static_cast<std::size_t>(id)];
      if (nd.var >= 0)
        lp.set_var_bounds(nd.var, static_cast<double>(nd.val), static_cast<double>(nd.val));
      for (const auto& [var, val] : nd.extra)
        lp.set_var_bounds(var, static_cast<double>(val), static_cast<double>(val));
      id = nd.parent;
    }
  }

  // A pair's complementarity is genuinely violated at the relaxation when
  // both its slack and its dual are meaningfully positive. Binaries whose
  // pair is already complementary are only spuriously fractional: rounding
  // them reproduces the same continuous point.
  bool pair_violated(const BoundedSimplex& lp, const MilpModel::PairAudit& pa) const {
    if (pa.dual_var < 0 || pa.slack_row < 0) return false;
    double z = lp.var_value(pa.binary_var);
    double u = lp.var_value(pa.dual_var);
    double act = lp.var_value(lp.num_structural() + pa.slack_row);
    double row_hi = model_.rows[static_cast<std::size_t>(pa.slack_row)].hi;
    double s = act - pa.m_slack * z + pa.m_slack - row_hi;
    double un = u / std::max(pa.m_dual, 1e-12);
    double sn = s / std::max(pa.m_slack, 1e-12);
    return std::min(un, sn) > 1e-9;
  }

  // Complementarity-aware rounding: fix every binary and repair with one LP.
  bool try_heuristic(BoundedSimplex& lp, std::vector<double>& hx, double& hobj) const {
    std::vector<int> fix(model_.binaries.size(), 0);
    std::vector<char> done(static_cast<std::size_t>(model_.num_vars()), 0);
    for (const auto& pa : model_.pairs) {
      if (pa.binary_var < 0) continue;
      double z = lp.var_value(pa.binary_var);
      double u = (pa.dual_var >= 0) ? lp.var_value(pa.dual_var) : 0.0;
      double s = 0.0;
      if (pa.slack_row >= 0) {
        double act = lp.var_value(lp.num_structural() + pa.slack_row);
        double row_hi = model_.rows[static_cast<std::size_t>(pa.slack_row)].hi;
        s = act - pa.m_slack * z + pa.m_slack - row_hi;
      }
      double us = u / std::max(pa.m_dual, 1e-12);
      double ss = s / std::max(pa.m_slack, 1e-12);
      int bi = bin_index_of_var_[static_cast<std::size_t>(pa.binary_var)];
      if (bi >= 0) fix[static_cast<std::size_t>(bi)] = (us >= ss) ? 1 : 0;
      done[static_cast<std::size_t>(pa.binary_var)] = 1;
    }
    for (std::size_t i = 0; i < model_.binaries.size(); ++i)
      if (!done[static_cast<std::size_t>(model_.binaries[i].var)])
        fix[i] = lp.var_value(model_.binaries[i].var) >= 0.5 ? 1 : 0;

    for (std::size_t i = 0; i < model_.binaries.size(); ++i)
      lp.set_var_bounds(model_.binaries[i].var, fix[i], fix[i]);
    SolveStatus st = lp.solve();
    if (st != SolveStatus::kOptimal) return false;
    hobj = lp.objective();
    hx.resize(static_cast<std::size_t>(model_.num_vars()));
    for (int j = 0; j < model_.num_vars(); ++j) hx[static_cast<std::size_t>(j)] = lp.var_value(j);
    return true;
  }

  // Most-fractional binary; ties broken by group order, then declaration.
  // With genuine_only, binaries whose complementarity pair already holds at
  // the relaxation are skipped: their fractionality is an artifact of the
  // big-M rows and rounding them changes nothing.
  int pick_branch_var(const BoundedSimplex& lp, bool genuine_only) const {
    int best = -1;
    double best_frac = opt_.int_tol;
    int best_rank = 1 << 30;
    for (std::size_t i = 0; i < model_.binaries.size(); ++i) {
      int v = model_.binaries[i].var;
      if (lp.var_lo(v) == lp.var_hi(v)) continue;  // fixed at this node
      double z = lp.var_value(v);
      double frac = std::min(z, 1.0 - z);
      if (frac <= opt_.int_tol) continue;
      if (genuine_only) {
        int p = pair_of_var_[static_cast<std::size_t>(v)];
        if (p >= 0 && !pair_violated(lp, model_.pairs[static_cast<std::size_t>(p)])) continue;
      }
      bool better = frac > best_frac + 1e-12 ||
                    (best >= 0 && std::fabs(frac - best_frac) <= 1e-12 && rank_of_[i] < best_rank);
      if (better) {
        best = v;
        best_frac = frac;
        best_rank = rank_of_[i];
      }
    }
    return best;
  }

  // Subtree-valid binary fixings from LP reduced costs: flipping a nonbasic
  // binary can improve the subtree bound by at most its reduced cost.
  std::vector<std::pair<int, int>> reduced_cost_fixings(BoundedSimplex& lp, double bound_max,
                                                        double cutoff) const {
    std::vector<std::pair<int, int>> out;
    if (cutoff == -kInf) return out;
    LpSolution sol = lp.extract(false);
    for (const auto& b : model_.binaries) {
      if (lp.var_lo(b.var) == lp.var_hi(b.var)) continue;
      double z = sol.x[static_cast<std::size_t>(b.var)];
      double d = sol.reduced_cost[static_cast<std::size_t>(b.var)];
      double d_max = model_.maximize ? d : -d;
      if (z <= opt_.int_tol && bound_max + d_max <= cutoff)
        out.push_back({b.var, 0});
      else if (z >= 1.0 - opt_.int_tol && bound_max - d_max <= cutoff)
        out.push_back({b.var, 1});
    }
    return out;
  }

  void worker(bnb_detail::Shared& sh, int wid) {
    BoundedSimplex lp(model_.relax(), opt_.lp);
    std::vector<double> hx;
    long heur_countdown = 0;

    auto snapshot_x = [&] {
      std::vector<double> x(static_cast<std::size_t>(model_.num_vars()));
      for (int j = 0; j < model_.num_vars(); ++j) x[static_cast<std::size_t>(j)] = lp.var_value(j);
      return x;
    };
    // Requires sh.mu held.
    auto update_incumbent = [&](bnb_detail::Shared& s, double v_max, std::vector<double> x) {
      if (!s.have_incumbent || v_max > s.inc_max) {
        s.have_incumbent = true;
        s.inc_max = v_max;
        s.inc_x = std::move(x);
      }
    };

    while (true) {
      int node_id = -1;
      {
        std::unique_lock<std::mutex> lk(sh.mu);
        sh.active_bound_max[static_cast<std::size_t>(wid)] = -kInf;
        while (!sh.done && sh.open.empty()) {
          if (++sh.idle == opt_.workers) {
            sh.done = true;
            sh.cv.notify_all();
            --sh.idle;
            break;
          }
          sh.cv.wait(lk);
          --sh.idle;
        }
        if (sh.done) return;
        node_id = sh.open.top();
        sh.open.pop();
        auto& nd = sh.nodes[static_cast<std::size_t>(node_id)];
        sh.active_bound_max[static_cast<std::size_t>(wid)] = nd.bound_max;
        if (nd.warm) {
          lp.restore_basis(*nd.warm);
          nd.warm.reset();
        }
      }

      // Plunge from this node until the dive is resolved.
      while (node_id >= 0) {
        {
          std::unique_lock<std::mutex> lk(sh.mu);
          if (sh.done) return;
          if (sh.node_count >= opt_.node_limit || elapsed() > opt_.time_limit) {
            sh.stop_status = SolveStatus::kIterationLimit;
            sh.done = true;
            sh.cv.notify_all();
            return;
          }
          ++sh.node_count;
          double cutoff = sh.have_incumbent
                              ? sh.inc_max + opt_.gap * (1.0 + std::fabs(sh.inc_max))
                              : -kInf;
          const auto& nd = sh.nodes[static_cast<std::size_t>(node_id)];
          if (sh.have_incumbent && nd.bound_max <= cutoff) {
            sh.pruned_max = std::max(sh.pruned_max, nd.bound_max);
            node_id = -1;
            record_history(sh);
          }
        }
        if (node_id < 0) break;

        apply_node(lp, sh, node_id);
        long it0 = lp.iterations();
        SolveStatus st = lp.solve();
        double bound_max = (st == SolveStatus::kOptimal) ? sense_ * lp.objective() : -kInf;

        double cutoff;
        {
          std::unique_lock<std::mutex> lk(sh.mu);
          sh.lp_iterations += lp.iterations() - it0;
          if (st == SolveStatus::kUnbounded &&
              sh.nodes[static_cast<std::size_t>(node_id)].parent < 0) {
            sh.stop_status = SolveStatus::kUnbounded;
            sh.done = true;
            sh.cv.notify_all();
            return;
          }
          if (st == SolveStatus::kIterationLimit)
            throw std::runtime_error("solve_milp: node LP hit the iteration limit");
          cutoff = sh.have_incumbent
                       ? sh.inc_max + opt_.gap * (1.0 + std::fabs(sh.inc_max))
                       : -kInf;
          if (st != SolveStatus::kOptimal || bound_max <= cutoff) {
            if (st == SolveStatus::kOptimal)
              sh.pruned_max = std::max(
                  sh.pruned_max,
                  std::min(bound_max, sh.nodes[static_cast<std::size_t>(node_id)].bound_max));
            node_id = -1;
            record_history(sh);
            continue;
          }
          sh.active_bound_max[static_cast<std::size_t>(wid)] = bound_max;
        }

        // Integral incumbent at this node?
        if (pick_branch_var(lp, false) < 0) {
          std::unique_lock<std::mutex> lk(sh.mu);
          update_incumbent(sh, bound_max, snapshot_x());
          node_id = -1;
          record_history(sh);
          continue;
        }

        // Periodic rounding heuristic for early incumbents.
        if (heur_countdown-- <= 0) {
          heur_countdown = opt_.heuristic_period;
          double hobj = 0.0;
          bool hok = try_heuristic(lp, hx, hobj);
          apply_node(lp, sh, node_id);
          SolveStatus st2 = lp.solve();
          std::unique_lock<std::mutex> lk(sh.mu);
          if (hok) update_incumbent(sh, sense_ * hobj, hx);
          if (st2 != SolveStatus::kOptimal) {
            node_id = -1;
            record_history(sh);
            continue;
          }
        }

        int bvar = pick_branch_var(lp, true);
        if (bvar < 0) {
          // Fractional binaries remain but every complementarity pair holds:
          // rounding reproduces the same point, so the node closes at its
          // own bound once the rounding repair confirms it.
          double hobj = 0.0;
          bool hok = try_heuristic(lp, hx, hobj);
          double need = bound_max - 1e-7 * (1.0 + std::fabs(bound_max));
          if (hok && sense_ * hobj >= need) {
            std::unique_lock<std::mutex> lk(sh.mu);
            update_incumbent(sh, sense_ * hobj, hx);
            node_id = -1;
            record_history(sh);
            continue;
          }
          // Rounding lost value (tolerance-level degeneracy): branch on the
          // rawest fractional binary instead.
          apply_node(lp, sh, node_id);
          if (lp.solve() != SolveStatus::kOptimal) {
            std::unique_lock<std::mutex> lk(sh.mu);
            node_id = -1;
            record_history(sh);
            continue;
          }
          bvar = pick_branch_var(lp, false);
          if (bvar < 0) {
            std::unique_lock<std::mutex> lk(sh.mu);
            update_incumbent(sh, sense_ * lp.objective(), snapshot_x());
            node_id = -1;
            record_history(sh);
            continue;
          }
        }

        std::vector<std::pair<int, int>> extra = reduced_cost_fixings(lp, bound_max, cutoff);

        auto warm = std::make_shared<BoundedSimplex::Basis>(lp.basis());

        std::unique_lock<std::mutex> lk(sh.mu);
        if (sh.done) return;
        int plunge_val = lp.var_value(bvar) >= 0.5 ? 1 : 0;
        bnb_detail::Node child_off;
        child_off.parent = node_id;
        child_off.var = bvar;
        child_off.val = 1 - plunge_val;
        child_off.bound_max = bound_max;
        child_off.depth = sh.nodes[static_cast<std::size_t>(node_id)].depth + 1;
        child_off.extra = extra;
        bnb_detail::Node child_on = child_off;
        child_on.val = plunge_val;
        child_off.warm = std::move(warm);
        sh.nodes.push_back(std::move(child_off));
        sh.open.push(static_cast<int>(sh.nodes.size()) - 1);
        sh.cv.notify_one();
        sh.nodes.push_back(std::move(child_on));
        node_id = static_cast<int>(sh.nodes.size()) - 1;
        record_history(sh);
      }
    }
  }

  void record_history(bnb_detail::Shared& sh) {
    if (!opt_.record_history) return;
    sh.bound_history.push_back(sense_ * sh.global_bound_max());
    sh.incumbent_history.push_back(sh.have_incumbent ? sense_ * sh.inc_max : -sense_ * kInf);
  }

  const MilpModel& model_;
  MilpOptions opt_;
  double sense_;
  std::vector<int> prio_;
  std::vector<int> rank_of_;
  std::vector<int> bin_index_of_var_;
  std::vector<int> pair_of_var_;
  std::chrono::steady_clock::time_point start_;
};

inline MilpSolution solve_milp(const MilpModel& model, MilpOptions opt = {}) {
  if (model.binaries.empty()) {
    LpSolution lp = solve_lp(model.relax(), opt.lp);
    MilpSolution sol;
    sol.status = lp.status;
    sol.x = lp.x;
    sol.objective = lp.objective;
    sol.best_bound = lp.objective;
    sol.gap = 0.0;
    sol.node_count = 1;
    sol.lp_iterations = lp.iterations;
    return sol;
  }
  BranchAndBound bb(model, opt);
  return bb.run();
}

/// Exhaustive reference: enumerates every binary assignment and solves the
/// resulting LP. Exact up to LP tolerances; intended for tiny models.
inline MilpSolution brute_force_milp(const MilpModel& model, int max_binaries = 20,
                                     MilpOptions opt = {}) {
  const int nb = model.num_binaries();
  if (nb > max_binaries)
    throw std::runtime_error("brute_force_milp: too many binaries (" + std::to_string(nb) + ")");
  BoundedSimplex lp(model.relax(), opt.lp);
  const double sense = model.maximize ? 1.0 : -1.0;
  MilpSolution sol;
  sol.status = SolveStatus::kInfeasible;
  double best_max = -kInf;
  const std::uint64_t count = 1ULL << nb;
  for (std::uint64_t mask = 0; mask < count; ++mask) {
    for (int i = 0; i < nb; ++i) {
      double v = (mask >> i) & 1ULL ? 1.0 : 0.0;
      lp.set_var_bounds(model.binaries[static_cast<std::size_t>(i)].var, v, v);
    }
    SolveStatus st = lp.solve();
    ++sol.node_count;
    if (st != SolveStatus::kOptimal) continue;
    double v_max = sense * lp.objective();
    if (v_max > best_max + 1e-12) {
      best_max = v_max;
      sol.status = SolveStatus::kOptimal;
      sol.x.resize(static_cast<std::size_t>(model.num_vars()));
      for (int j = 0; j < model.num_vars(); ++j)
        sol.x[static_cast<std::size_t>(j)] = lp.var_value(j);
    }
  }
  sol.lp_iterations = lp.iterations();
  if (sol.status == SolveStatus::kOptimal) {
    sol.objective = sense * best_max;
    sol.best_bound = sol.objective;
    sol.gap = 0.0;
  }
  return sol;
}

}  // namespace trimarket
