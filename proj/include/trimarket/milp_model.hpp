#pragma once

#include <string>
#include <vector>

#include "trimarket/lp.hpp"

namespace trimarket {

/// Branching/audit groups for complementarity binaries, in branching
/// priority order.
enum class PairGroup : int {
  kFlow = 0,
  kReserve = 1,
  kGenBox = 2,
  kGenReserve = 3,
  kBidBox = 4,
  kBidReserve = 5,
  kEuc = 6,
};

inline const char* to_string(PairGroup g) {
  switch (g) {
    case PairGroup::kFlow: return "flow";
    case PairGroup::kReserve: return "reserve";
    case PairGroup::kGenBox: return "gen_box";
    case PairGroup::kGenReserve: return "gen_reserve";
    case PairGroup::kBidBox: return "bid_box";
    case PairGroup::kBidReserve: return "bid_reserve";
    case PairGroup::kEuc: return "euc";
  }
  return "?";
}

/// Variable index bookkeeping for models built from a market case, so that
/// solutions can be mapped back to clearing quantities, duals and prices.
/// Index vectors are empty for models that lack the corresponding entities.
struct JointVarMap {
  std::vector<int> pg, rg;          // per gen offer
  std::vector<int> pd, rd;          // per bid
  int lambda = -1;
  std::vector<int> mu_lo, mu_hi;    // per line
  int nu = -1;
  std::vector<int> rho_g_lo, rho_g_hi, eta_g_lo, eta_g_hi;  // per gen offer
  std::vector<int> rho_d_lo, rho_d_hi, eta_d_lo, eta_d_hi;  // per bid
  std::vector<std::vector<int>> x, y;                        // per area, per block
  std::vector<std::vector<int>> gamma_lo, gamma_hi, zeta_lo, zeta_hi;
  std::vector<int> a_d, b_d;        // per strategic bid (Case order of D~)
  std::vector<int> alpha, beta;     // per area
};

/// Mixed-integer linear program: continuous columns plus binary columns,
/// linear ranged rows, and a linear objective. Binary columns double as
/// complementarity indicators; `pairs` records the big-M bookkeeping needed
/// for branching priorities, the rounding heuristic and the post-solve audit.
struct MilpModel {
  struct Row {
    std::vector<int> idx;
    std::vector<double> val;
    double lo = -kInf;
    double hi = kInf;
    std::string name;
  };

  struct Binary {
    int var = -1;
    std::string name;
    PairGroup group = PairGroup::kEuc;
  };

  /// One linearized complementarity pair: slack expression s >= 0 with bound
  /// m_slack, dual variable u >= 0 with bound m_dual, binary z such that
  /// s <= m_slack (1 - z) and u <= m_dual z.
  struct PairAudit {
    std::string name;
    PairGroup group = PairGroup::kEuc;
    int binary_var = -1;
    int dual_var = -1;
    int slack_row = -1;   // row carrying s + m_slack z <= m_slack + const
    double m_slack = 0.0;
    double m_dual = 0.0;
  };

  bool maximize = true;
  std::vector<std::string> var_names;
  std::vector<double> var_lo, var_hi;
  std::vector<double> objective;
  double objective_offset = 0.0;
  std::vector<Row> rows;
  std::vector<Binary> binaries;
  std::vector<PairAudit> pairs;
  JointVarMap map;
  // Build provenance for market models (unused by synthetic ones): which
  // variant produced the model and any prices substituted as constants.
  bool is_joint = false;
  int variant_tag = 0;
  std::vector<double> fixed_alpha, fixed_beta;

  int num_vars() const { return static_cast<int>(var_names.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }
  int num_binaries() const { return static_cast<int>(binaries.size()); }

  int add_var(const std::string& name, double lb, double ub) {
    var_names.push_back(name);
    var_lo.push_back(lb);
    var_hi.push_back(ub);
    objective.push_back(0.0);
    return num_vars() - 1;
  }

  int add_binary(const std::string& name, PairGroup group) {
    int v = add_var(name, 0.0, 1.0);
    binaries.push_back(Binary{v, name, group});
    return v;
  }

  int add_row(Row r) {
    rows.push_back(std::move(r));
    return num_rows() - 1;
  }

  void add_obj(int var, double coef) { objective[static_cast<std::size_t>(var)] += coef; }

  /// The continuous relaxation (binaries become [0,1] columns).
  Lp relax() const {
    Lp lp;
    lp.maximize = maximize;
    lp.obj = objective;
    lp.lo = var_lo;
    lp.hi = var_hi;
    lp.var_names = var_names;
    lp.rows.reserve(rows.size());
    for (const Row& r : rows) lp.rows.push_back(Lp::Row{r.idx, r.val, r.lo, r.hi, r.name});
    return lp;
  }
};

/// Result of a branch-and-bound or brute-force solve.
struct MilpSolution {
  SolveStatus status = SolveStatus::kInfeasible;
  std::vector<double> x;
  double objective = 0.0;
  double best_bound = 0.0;
  double gap = 0.0;            // |bound - objective| / (1 + |objective|)
  long node_count = 0;
  long lp_iterations = 0;
  std::vector<int> duals_at_bound;  // pair indices whose dual sits at its big-M
  // Populated when MilpOptions::record_history is set: the global bound and
  // incumbent value after each processed node.
  std::vector<double> bound_history;
  std::vector<double> incumbent_history;
};

}  // namespace trimarket
