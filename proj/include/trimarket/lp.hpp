#pragma once

#include <limits>
#include <string>
#include <vector>

namespace trimarket {

inline constexpr double kInf = std::numeric_limits<double>::infinity();

enum class SolveStatus { kOptimal, kInfeasible, kUnbounded, kIterationLimit };

inline const char* to_string(SolveStatus s) {
  switch (s) {
    case SolveStatus::kOptimal: return "optimal";
    case SolveStatus::kInfeasible: return "infeasible";
    case SolveStatus::kUnbounded: return "unbounded";
    case SolveStatus::kIterationLimit: return "iteration_limit";
  }
  return "?";
}

/// Linear program over bounded variables and ranged rows:
///   optimize c^T x   s.t.   row.lo <= a_i^T x <= row.hi,  lo_j <= x_j <= hi_j.
/// Rows and columns carry names for diagnostics and export.
struct Lp {
  struct Row {
    std::vector<int> idx;
    std::vector<double> val;
    double lo = -kInf;
    double hi = kInf;
    std::string name;
  };

  bool maximize = false;
  std::vector<double> obj;
  std::vector<double> lo, hi;
  std::vector<std::string> var_names;
  std::vector<Row> rows;

  int num_vars() const { return static_cast<int>(obj.size()); }
  int num_rows() const { return static_cast<int>(rows.size()); }

  int add_var(const std::string& name, double lb, double ub, double cost = 0.0) {
    var_names.push_back(name);
    lo.push_back(lb);
    hi.push_back(ub);
    obj.push_back(cost);
    return num_vars() - 1;
  }

  int add_row(Row r) {
    rows.push_back(std::move(r));
    return num_rows() - 1;
  }
};

/// Optimal basic solution of an Lp. Duals and reduced costs follow the
/// objective sense of the input: at optimality of a minimization,
///   c_j - y^T A_j = reduced_cost_j, rows at lower bound have y >= 0,
/// rows at upper bound have y <= 0; for maximization all signs flip so that
/// binding <= rows carry nonnegative duals.
struct LpSolution {
  SolveStatus status = SolveStatus::kInfeasible;
  double objective = 0.0;
  std::vector<double> x;
  std::vector<double> row_dual;
  std::vector<double> reduced_cost;
  long iterations = 0;
};

}  // namespace trimarket
