#pragma once

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <stdexcept>
#include <vector>

#include "trimarket/linalg.hpp"
#include "trimarket/lp.hpp"

namespace trimarket {

struct SimplexOptions {
  double feas_tol = 1e-7;
  double dual_tol = 1e-7;
  double pivot_tol = 1e-8;
  // Pivots between basis refactorizations; <= 0 scales with the row count
  // (floor of 50) so large bases amortize their factorization cost.
  int refactor_interval = 0;
  long max_iters = 500000;
};

/// Bounded-variable primal simplex over the system  A x - s = 0,
/// row.lo <= s <= row.hi, lo <= x <= hi, with a composite phase 1
/// (infeasibility minimization, no artificial columns).
///
/// The basis is factorized by eliminating basic logical columns (each is a
/// unit column) and LU-factorizing the remaining dense kernel; pivots between
/// refactorizations are absorbed by product-form eta updates. Bounds may be
/// changed between solves and the solver warm-starts from the current basis,
/// which is what makes branch-and-bound node solves cheap.
class BoundedSimplex {
 public:
  enum VStat : std::uint8_t { kBasic = 0, kAtLower = 1, kAtUpper = 2, kFreeNb = 3 };

  struct Basis {
    std::vector<int> basic;
    std::vector<std::uint8_t> vstat;
  };

  explicit BoundedSimplex(const Lp& lp, SimplexOptions opt = {})
      : opt_(opt),
        n_(lp.num_vars()),
        m_(lp.num_rows()),
        total_(lp.num_vars() + lp.num_rows()),
        maximize_(lp.maximize) {
    if (opt_.refactor_interval <= 0)
      opt_.refactor_interval = std::min(150, std::max(50, m_ / 3));
    cost_.assign(static_cast<std::size_t>(total_), 0.0);
    orig_cost_ = lp.obj;
    for (int j = 0; j < n_; ++j)
      cost_[static_cast<std::size_t>(j)] = maximize_ ? -lp.obj[static_cast<std::size_t>(j)]
                                                     : lp.obj[static_cast<std::size_t>(j)];
    lo_.assign(static_cast<std::size_t>(total_), -kInf);
    hi_.assign(static_cast<std::size_t>(total_), kInf);
    for (int j = 0; j < n_; ++j) {
      lo_[static_cast<std::size_t>(j)] = lp.lo[static_cast<std::size_t>(j)];
      hi_[static_cast<std::size_t>(j)] = lp.hi[static_cast<std::size_t>(j)];
    }
    for (int i = 0; i < m_; ++i) {
      lo_[static_cast<std::size_t>(n_ + i)] = lp.rows[static_cast<std::size_t>(i)].lo;
      hi_[static_cast<std::size_t>(n_ + i)] = lp.rows[static_cast<std::size_t>(i)].hi;
    }
    orig_lo_ = lo_;
    orig_hi_ = hi_;

    // Column-wise structural matrix.
    col_start_.assign(static_cast<std::size_t>(n_) + 1, 0);
    for (const auto& row : lp.rows)
      for (int j : row.idx) ++col_start_[static_cast<std::size_t>(j) + 1];
    for (int j = 0; j < n_; ++j)
      col_start_[static_cast<std::size_t>(j) + 1] += col_start_[static_cast<std::size_t>(j)];
    col_row_.resize(col_start_[static_cast<std::size_t>(n_)]);
    col_val_.resize(col_start_[static_cast<std::size_t>(n_)]);
    {
      std::vector<int> fill(col_start_.begin(), col_start_.end() - 1);
      for (int i = 0; i < m_; ++i) {
        const auto& row = lp.rows[static_cast<std::size_t>(i)];
        for (std::size_t k = 0; k < row.idx.size(); ++k) {
          int j = row.idx[k];
          int p = fill[static_cast<std::size_t>(j)]++;
          col_row_[static_cast<std::size_t>(p)] = i;
          col_val_[static_cast<std::size_t>(p)] = row.val[k];
        }
      }
    }

    x_.assign(static_cast<std::size_t>(total_), 0.0);
    reset_to_slack_basis();
  }

  int num_structural() const { return n_; }
  int num_rows() const { return m_; }
  long iterations() const { return total_iters_; }

  void set_var_bounds(int j, double lb, double ub) {
    lo_[static_cast<std::size_t>(j)] = lb;
    hi_[static_cast<std::size_t>(j)] = ub;
  }

  void reset_var_bounds(int j) {
    lo_[static_cast<std::size_t>(j)] = orig_lo_[static_cast<std::size_t>(j)];
    hi_[static_cast<std::size_t>(j)] = orig_hi_[static_cast<std::size_t>(j)];
  }

  double var_lo(int j) const { return lo_[static_cast<std::size_t>(j)]; }
  double var_hi(int j) const { return hi_[static_cast<std::size_t>(j)]; }
  double var_value(int j) const { return x_[static_cast<std::size_t>(j)]; }

  Basis basis() const { return Basis{basic_, vstat_}; }

  void restore_basis(const Basis& b) {
    if (b.basic == basic_ && b.vstat == vstat_) return;
    basic_ = b.basic;
    vstat_ = b.vstat;
    basic_pos_.assign(static_cast<std::size_t>(total_), -1);
    for (int k = 0; k < m_; ++k) basic_pos_[static_cast<std::size_t>(basic_[k])] = k;
    fact_valid_ = false;
  }

  void reset_to_slack_basis() {
    basic_.resize(static_cast<std::size_t>(m_));
    vstat_.assign(static_cast<std::size_t>(total_), kAtLower);
    basic_pos_.assign(static_cast<std::size_t>(total_), -1);
    for (int i = 0; i < m_; ++i) {
      basic_[static_cast<std::size_t>(i)] = n_ + i;
      basic_pos_[static_cast<std::size_t>(n_ + i)] = i;
      vstat_[static_cast<std::size_t>(n_ + i)] = kBasic;
    }
    fact_valid_ = false;
  }

  /// Runs the simplex from the current basis (warm) or the slack basis.
  SolveStatus solve() {
    prepare_start();
    SolveStatus st = iterate();
    last_status_ = st;
    return st;
  }

  /// Internal-sense objective (minimization value) of the current point.
  double internal_objective() const {
    double v = 0.0;
    for (int j = 0; j < total_; ++j)
      if (cost_[static_cast<std::size_t>(j)] != 0.0)
        v += cost_[static_cast<std::size_t>(j)] * x_[static_cast<std::size_t>(j)];
    return v;
  }

  /// Objective in the original (possibly maximization) sense.
  double objective() const { return maximize_ ? -internal_objective() : internal_objective(); }

  /// Extracts the solution; with polish=true the basis is refactorized first
  /// so primal values and duals are recomputed to factorization accuracy.
  LpSolution extract(bool polish = true) {
    LpSolution sol;
    sol.status = last_status_;
    sol.iterations = total_iters_;
    if (polish && last_status_ == SolveStatus::kOptimal) {
      refactorize();
      recompute_basics();
    }
    sol.x.assign(x_.begin(), x_.begin() + n_);
    sol.objective = 0.0;
    for (int j = 0; j < n_; ++j)
      sol.objective += orig_cost_[static_cast<std::size_t>(j)] * x_[static_cast<std::size_t>(j)];

    std::vector<double> cb(static_cast<std::size_t>(m_));
    for (int k = 0; k < m_; ++k) cb[static_cast<std::size_t>(k)] = cost_[static_cast<std::size_t>(basic_[k])];
    std::vector<double> y;
    btran(cb, y);
    sol.row_dual.assign(static_cast<std::size_t>(m_), 0.0);
    for (int i = 0; i < m_; ++i)
      sol.row_dual[static_cast<std::size_t>(i)] = maximize_ ? -y[static_cast<std::size_t>(i)] : y[static_cast<std::size_t>(i)];
    sol.reduced_cost.assign(static_cast<std::size_t>(n_), 0.0);
    for (int j = 0; j < n_; ++j) {
      double d = cost_[static_cast<std::size_t>(j)];
      for (int p = col_start_[static_cast<std::size_t>(j)]; p < col_start_[static_cast<std::size_t>(j) + 1]; ++p)
        d -= y[static_cast<std::size_t>(col_row_[static_cast<std::size_t>(p)])] * col_val_[static_cast<std::size_t>(p)];
      sol.reduced_cost[static_cast<std::size_t>(j)] = maximize_ ? -d : d;
    }
    return sol;
  }

 private:
  struct Eta {
    int pos;
    std::vector<double> w;  // dense, length m
  };

  // --- factorization ----------------------------------------------------

  void refactorize() {
    // Basic logical columns are unit columns; eliminate them and factorize
    // the dense kernel of structural basics on the uncovered rows.
    f_logical_pos_.assign(static_cast<std::size_t>(m_), -1);
    f_sb_pos_.clear();
    f_sb_col_.clear();
    std::vector<char> covered(static_cast<std::size_t>(m_), 0);
    for (int k = 0; k < m_; ++k) {
      int col = basic_[static_cast<std::size_t>(k)];
      if (col >= n_) {
        int r = col - n_;
        covered[static_cast<std::size_t>(r)] = 1;
        f_logical_pos_[static_cast<std::size_t>(r)] = k;
      } else {
        f_sb_pos_.push_back(k);
        f_sb_col_.push_back(col);
      }
    }
    f_dense_row_of_.assign(static_cast<std::size_t>(m_), -1);
    f_dense_rows_.clear();
    for (int i = 0; i < m_; ++i)
      if (!covered[static_cast<std::size_t>(i)]) {
        f_dense_row_of_[static_cast<std::size_t>(i)] = static_cast<int>(f_dense_rows_.size());
        f_dense_rows_.push_back(i);
      }
    const std::size_t md = f_dense_rows_.size();
    if (md != f_sb_pos_.size())
      throw std::runtime_error("simplex: inconsistent basis partition");

    Matrix d(md, md, 0.0);
    for (std::size_t q = 0; q < f_sb_col_.size(); ++q) {
      int j = f_sb_col_[q];
      for (int p = col_start_[static_cast<std::size_t>(j)]; p < col_start_[static_cast<std::size_t>(j) + 1]; ++p) {
        int dr = f_dense_row_of_[static_cast<std::size_t>(col_row_[static_cast<std::size_t>(p)])];
        if (dr >= 0) d(static_cast<std::size_t>(dr), q) = col_val_[static_cast<std::size_t>(p)];
      }
    }
    try {
      kernel_.factorize(std::move(d));
    } catch (const std::runtime_error&) {
      // Degenerate basis from an earlier numerical mishap: fall back to the
      // slack basis and factor that (identity kernel).
      reset_to_slack_basis();
      clamp_nonbasics();
      f_logical_pos_.assign(static_cast<std::size_t>(m_), -1);
      for (int k = 0; k < m_; ++k) f_logical_pos_[static_cast<std::size_t>(k)] = k;
      f_sb_pos_.clear();
      f_sb_col_.clear();
      f_dense_rows_.clear();
      f_dense_row_of_.assign(static_cast<std::size_t>(m_), -1);
      kernel_.factorize(Matrix(0, 0));
    }
    etas_.clear();
    fact_valid_ = true;
  }

  // Solve B0 w = rhs (rhs dense in row space), then apply etas.
  void ftran_dense(std::vector<double>& rhs_then_w) {
    const std::size_t md = f_dense_rows_.size();
    std::vector<double>& a = rhs_then_w;
    std::vector<double>& rd = scratch_rd_;
    std::vector<double>& ws = scratch_ws_;
    rd.resize(md);
    for (std::size_t p = 0; p < md; ++p) rd[p] = a[static_cast<std::size_t>(f_dense_rows_[p])];
    if (md > 0)
      kernel_.solve(rd, ws);
    std::vector<double>& w = scratch_w_;
    w.assign(static_cast<std::size_t>(m_), 0.0);
    for (std::size_t q = 0; q < f_sb_pos_.size(); ++q) w[static_cast<std::size_t>(f_sb_pos_[q])] = ws[q];
    // Logical basics: w_k = (A_r . wS) - a_r over the covered rows; compute
    // A_r . wS by scattering structural columns instead of row access.
    //   contribution of kernel column q to covered row r: val * ws[q]
    for (int r = 0; r < m_; ++r) {
      int k = f_logical_pos_[static_cast<std::size_t>(r)];
      if (k >= 0) w[static_cast<std::size_t>(k)] = -a[static_cast<std::size_t>(r)];
    }
    for (std::size_t q = 0; q < f_sb_col_.size(); ++q) {
      if (ws[q] == 0.0) continue;
      int j = f_sb_col_[q];
      for (int p = col_start_[static_cast<std::size_t>(j)]; p < col_start_[static_cast<std::size_t>(j) + 1]; ++p) {
        int r = col_row_[static_cast<std::size_t>(p)];
        int k = f_logical_pos_[static_cast<std::size_t>(r)];
        if (k >= 0) w[static_cast<std::size_t>(k)] += col_val_[static_cast<std::size_t>(p)] * ws[q];
      }
    }
    for (const Eta& e : etas_) apply_eta(e, w);
    rhs_then_w.swap(w);
  }

  void ftran_col(int q_col, std::vector<double>& w) {
    std::vector<double>& a = scratch_a_;
    a.assign(static_cast<std::size_t>(m_), 0.0);
    if (q_col >= n_) {
      a[static_cast<std::size_t>(q_col - n_)] = -1.0;
    } else {
      for (int p = col_start_[static_cast<std::size_t>(q_col)]; p < col_start_[static_cast<std::size_t>(q_col) + 1]; ++p)
        a[static_cast<std::size_t>(col_row_[static_cast<std::size_t>(p)])] = col_val_[static_cast<std::size_t>(p)];
    }
    ftran_dense(a);
    w.swap(a);
  }

  static void apply_eta(const Eta& e, std::vector<double>& v) {
    double vr = v[static_cast<std::size_t>(e.pos)] / e.w[static_cast<std::size_t>(e.pos)];
    if (vr == 0.0) return;
    const std::size_t m = v.size();
    for (std::size_t i = 0; i < m; ++i) v[i] -= e.w[i] * vr;
    v[static_cast<std::size_t>(e.pos)] = vr;
  }

  static void apply_eta_transpose(const Eta& e, std::vector<double>& c) {
    // Solve E^T u = c: u_i = c_i (i != pos); w . u = c_pos.
    double s = c[static_cast<std::size_t>(e.pos)];
    const std::size_t m = c.size();
    for (std::size_t i = 0; i < m; ++i)
      if (static_cast<int>(i) != e.pos) s -= e.w[i] * c[i];
    c[static_cast<std::size_t>(e.pos)] = s / e.w[static_cast<std::size_t>(e.pos)];
  }

  // Solve B^T y = cb (cb in basis-position space), y in row space.
  void btran(const std::vector<double>& cb, std::vector<double>& y) {
    std::vector<double>& u = scratch_u_;
    u.assign(cb.begin(), cb.end());
    for (auto it = etas_.rbegin(); it != etas_.rend(); ++it) apply_eta_transpose(*it, u);
    y.assign(static_cast<std::size_t>(m_), 0.0);
    for (int r = 0; r < m_; ++r) {
      int k = f_logical_pos_[static_cast<std::size_t>(r)];
      if (k >= 0) y[static_cast<std::size_t>(r)] = -u[static_cast<std::size_t>(k)];
    }
    const std::size_t md = f_dense_rows_.size();
    if (md > 0) {
      std::vector<double> rhs(md), yd;
      for (std::size_t q = 0; q < md; ++q) {
        double s = u[static_cast<std::size_t>(f_sb_pos_[q])];
        int j = f_sb_col_[q];
        for (int p = col_start_[static_cast<std::size_t>(j)]; p < col_start_[static_cast<std::size_t>(j) + 1]; ++p) {
          int r = col_row_[static_cast<std::size_t>(p)];
          if (f_logical_pos_[static_cast<std::size_t>(r)] >= 0)
            s -= col_val_[static_cast<std::size_t>(p)] * y[static_cast<std::size_t>(r)];
        }
        rhs[q] = s;
      }
      kernel_.solve_transpose(rhs, yd);
      for (std::size_t p = 0; p < md; ++p) y[static_cast<std::size_t>(f_dense_rows_[p])] = yd[p];
    }
  }

  // --- solve machinery ---------------------------------------------------

  void clamp_nonbasics() {
    for (int j = 0; j < total_; ++j) {
      if (vstat_[static_cast<std::size_t>(j)] == kBasic) continue;
      double lb = lo_[static_cast<std::size_t>(j)], ub = hi_[static_cast<std::size_t>(j)];
      if (lb == -kInf && ub == kInf) {
        if (vstat_[static_cast<std::size_t>(j)] != kFreeNb) {
          vstat_[static_cast<std::size_t>(j)] = kFreeNb;
          x_[static_cast<std::size_t>(j)] = 0.0;
        }
        continue;
      }
      switch (vstat_[static_cast<std::size_t>(j)]) {
        case kAtLower:
          x_[static_cast<std::size_t>(j)] = (lb != -kInf) ? lb : ub;
          vstat_[static_cast<std::size_t>(j)] = (lb != -kInf) ? kAtLower : kAtUpper;
          break;
        case kAtUpper:
          x_[static_cast<std::size_t>(j)] = (ub != kInf) ? ub : lb;
          vstat_[static_cast<std::size_t>(j)] = (ub != kInf) ? kAtUpper : kAtLower;
          break;
        case kFreeNb:
          if (x_[static_cast<std::size_t>(j)] < lb) { x_[static_cast<std::size_t>(j)] = lb; vstat_[static_cast<std::size_t>(j)] = kAtLower; }
          else if (x_[static_cast<std::size_t>(j)] > ub) { x_[static_cast<std::size_t>(j)] = ub; vstat_[static_cast<std::size_t>(j)] = kAtUpper; }
          break;
        default: break;
      }
    }
  }

  void recompute_basics() {
    // B x_B = -N x_N
    std::vector<double> rhs(static_cast<std::size_t>(m_), 0.0);
    for (int j = 0; j < n_; ++j) {
      double v = x_[static_cast<std::size_t>(j)];
      if (vstat_[static_cast<std::size_t>(j)] == kBasic || v == 0.0) continue;
      for (int p = col_start_[static_cast<std::size_t>(j)]; p < col_start_[static_cast<std::size_t>(j) + 1]; ++p)
        rhs[static_cast<std::size_t>(col_row_[static_cast<std::size_t>(p)])] -= col_val_[static_cast<std::size_t>(p)] * v;
    }
    for (int i = 0; i < m_; ++i) {
      int j = n_ + i;
      if (vstat_[static_cast<std::size_t>(j)] == kBasic) continue;
      rhs[static_cast<std::size_t>(i)] += x_[static_cast<std::size_t>(j)];  // -(-1)*x
    }
    ftran_dense(rhs);
    for (int k = 0; k < m_; ++k) x_[static_cast<std::size_t>(basic_[k])] = rhs[static_cast<std::size_t>(k)];
  }

  void prepare_start() {
    if (!fact_valid_) refactorize();
    clamp_nonbasics();
    recompute_basics();
  }

  double infeas_of(int j) const {
    double v = x_[static_cast<std::size_t>(j)];
    if (v < lo_[static_cast<std::size_t>(j)] - opt_.feas_tol) return lo_[static_cast<std::size_t>(j)] - v;
    if (v > hi_[static_cast<std::size_t>(j)] + opt_.feas_tol) return v - hi_[static_cast<std::size_t>(j)];
    return 0.0;
  }

  SolveStatus iterate() {
    bool phase1 = false;
    for (int k = 0; k < m_; ++k)
      if (infeas_of(basic_[static_cast<std::size_t>(k)]) > 0.0) { phase1 = true; break; }

    std::vector<double> cb(static_cast<std::size_t>(m_));
    std::vector<double> y, w;
    long stall = 0;
    bool bland = false;
    double last_obj = kInf;
    long iters_here = 0;

    while (true) {
      if (++iters_here > opt_.max_iters) return SolveStatus::kIterationLimit;
      ++total_iters_;
      if (static_cast<int>(etas_.size()) >= opt_.refactor_interval) {
        refactorize();
        recompute_basics();
      }

      // Current-phase cost over basics.
      double infeas_sum = 0.0;
      if (phase1) {
        for (int k = 0; k < m_; ++k) {
          int j = basic_[static_cast<std::size_t>(k)];
          double v = x_[static_cast<std::size_t>(j)];
          if (v < lo_[static_cast<std::size_t>(j)] - opt_.feas_tol) {
            cb[static_cast<std::size_t>(k)] = -1.0;
            infeas_sum += lo_[static_cast<std::size_t>(j)] - v;
          } else if (v > hi_[static_cast<std::size_t>(j)] + opt_.feas_tol) {
            cb[static_cast<std::size_t>(k)] = 1.0;
            infeas_sum += v - hi_[static_cast<std::size_t>(j)];
          } else {
            cb[static_cast<std::size_t>(k)] = 0.0;
          }
        }
        if (infeas_sum == 0.0) {
          phase1 = false;
          bland = false;
          stall = 0;
          last_obj = kInf;
          continue;
        }
      } else {
        for (int k = 0; k < m_; ++k)
          cb[static_cast<std::size_t>(k)] = cost_[static_cast<std::size_t>(basic_[k])];
      }

      btran(cb, y);

      // Pricing.
      int q = -1;
      double best = 0.0;
      int dir = +1;
      for (int j = 0; j < total_; ++j) {
        std::uint8_t st = vstat_[static_cast<std::size_t>(j)];
        if (st == kBasic) continue;
        double lb = lo_[static_cast<std::size_t>(j)], ub = hi_[static_cast<std::size_t>(j)];
        if (lb == ub) continue;  // fixed
        double d = phase1 ? 0.0 : cost_[static_cast<std::size_t>(j)];
        if (j >= n_) {
          d += y[static_cast<std::size_t>(j - n_)];  // column is -e_i
        } else {
          for (int p = col_start_[static_cast<std::size_t>(j)]; p < col_start_[static_cast<std::size_t>(j) + 1]; ++p)
            d -= y[static_cast<std::size_t>(col_row_[static_cast<std::size_t>(p)])] * col_val_[static_cast<std::size_t>(p)];
        }
        double score = 0.0;
        int cand_dir = 0;
        if (st == kAtLower && d < -opt_.dual_tol) { score = -d; cand_dir = +1; }
        else if (st == kAtUpper && d > opt_.dual_tol) { score = d; cand_dir = -1; }
        else if (st == kFreeNb && std::fabs(d) > opt_.dual_tol) { score = std::fabs(d); cand_dir = d < 0 ? +1 : -1; }
        if (cand_dir == 0) continue;
        if (bland) { q = j; dir = cand_dir; break; }
        if (score > best) { best = score; q = j; dir = cand_dir; }
      }

      if (q < 0) {
        if (phase1) return SolveStatus::kInfeasible;  // infeasibility is minimal but nonzero
        return SolveStatus::kOptimal;
      }

      ftran_col(q, w);

      // Ratio test. Entering moves by t in direction dir; basic k moves at
      // rate -dir*w[k]. Infeasible basics (phase 1) block when they reach the
      // bound they currently violate.
      double t_best = kInf;
      int leave_pos = -1;
      double leave_bound = 0.0;
      double best_w = 0.0;
      const double flip_t = hi_[static_cast<std::size_t>(q)] - lo_[static_cast<std::size_t>(q)];
      for (int k = 0; k < m_; ++k) {
        double wk = w[static_cast<std::size_t>(k)];
        if (std::fabs(wk) < 1e-11) continue;
        int j = basic_[static_cast<std::size_t>(k)];
        double rate = -dir * wk;  // dx_Bk/dt
        double v = x_[static_cast<std::size_t>(j)];
        double lb = lo_[static_cast<std::size_t>(j)], ub = hi_[static_cast<std::size_t>(j)];
        double t = kInf, bnd = 0.0;
        if (v < lb - opt_.feas_tol) {
          if (rate > 0.0) { t = (lb - v) / rate; bnd = lb; }
        } else if (v > ub + opt_.feas_tol) {
          if (rate < 0.0) { t = (ub - v) / rate; bnd = ub; }
        } else if (rate > 0.0 && ub != kInf) {
          t = (ub - v) / rate; bnd = ub;
        } else if (rate < 0.0 && lb != -kInf) {
          t = (lb - v) / rate; bnd = lb;
        }
        if (t == kInf) continue;
        if (t < 0.0) t = 0.0;
        bool better;
        if (leave_pos < 0)
          better = true;
        else if (bland)
          better = t < t_best - 1e-12 ||
                   (t <= t_best + 1e-12 && j < basic_[static_cast<std::size_t>(leave_pos)]);
        else
          better = t < t_best - 1e-9 || (t <= t_best + 1e-9 && std::fabs(wk) > best_w);
        if (better) {
          t_best = t;
          leave_pos = k;
          leave_bound = bnd;
          best_w = std::fabs(wk);
        }
      }

      if (flip_t <= t_best && flip_t != kInf) {
        // Bound flip, no basis change.
        double t = flip_t;
        for (int k = 0; k < m_; ++k)
          if (w[static_cast<std::size_t>(k)] != 0.0)
            x_[static_cast<std::size_t>(basic_[k])] -= dir * t * w[static_cast<std::size_t>(k)];
        if (dir > 0) { x_[static_cast<std::size_t>(q)] = hi_[static_cast<std::size_t>(q)]; vstat_[static_cast<std::size_t>(q)] = kAtUpper; }
        else { x_[static_cast<std::size_t>(q)] = lo_[static_cast<std::size_t>(q)]; vstat_[static_cast<std::size_t>(q)] = kAtLower; }
        continue;
      }

      if (leave_pos < 0) {
        if (phase1)
          throw std::runtime_error("simplex: unbounded phase-1 ray");
        return SolveStatus::kUnbounded;
      }

      double piv = w[static_cast<std::size_t>(leave_pos)];
      if (std::fabs(piv) < opt_.pivot_tol) {
        if (!etas_.empty()) {
          refactorize();
          recompute_basics();
          continue;  // redo iteration with a fresh factorization
        }
        // Freshly factorized and still tiny: skip this entering candidate by
        // one Bland step to avoid stalling forever.
        bland = true;
        if (++stall > 4 * static_cast<long>(m_ + n_) + 1000)
          throw std::runtime_error("simplex: numerical failure (tiny pivots persist)");
        continue;
      }

      // Apply the step.
      double t = t_best;
      for (int k = 0; k < m_; ++k)
        if (w[static_cast<std::size_t>(k)] != 0.0)
          x_[static_cast<std::size_t>(basic_[k])] -= dir * t * w[static_cast<std::size_t>(k)];
      int leave_col = basic_[static_cast<std::size_t>(leave_pos)];
      x_[static_cast<std::size_t>(leave_col)] = leave_bound;
      vstat_[static_cast<std::size_t>(leave_col)] =
          (leave_bound == lo_[static_cast<std::size_t>(leave_col)]) ? kAtLower : kAtUpper;
      x_[static_cast<std::size_t>(q)] += dir * t;
      vstat_[static_cast<std::size_t>(q)] = kBasic;
      basic_pos_[static_cast<std::size_t>(leave_col)] = -1;
      basic_pos_[static_cast<std::size_t>(q)] = leave_pos;
      basic_[static_cast<std::size_t>(leave_pos)] = q;
      etas_.push_back(Eta{leave_pos, std::move(w)});

      // Degeneracy watch: switch to Bland's rule on long stalls.
      if (!phase1) {
        double obj = internal_objective();
        if (obj < last_obj - 1e-12 * (1.0 + std::fabs(last_obj))) {
          stall = 0;
          bland = false;
        } else if (++stall > 2 * static_cast<long>(m_) + 500) {
          bland = true;
        }
        last_obj = obj;
      } else {
        // Phase-1 progress is monitored through the infeasibility sum, which
        // is recomputed at the top of the loop.
        if (++stall > 6 * static_cast<long>(m_ + n_) + 2000) bland = true;
      }
    }
  }

  // --- data ---------------------------------------------------------------

  SimplexOptions opt_;
  int n_ = 0, m_ = 0, total_ = 0;
  bool maximize_ = false;
  std::vector<double> orig_cost_;
  std::vector<double> cost_;          // internal (minimization) costs, logicals 0
  std::vector<double> lo_, hi_;       // current bounds, structurals then logicals
  std::vector<double> orig_lo_, orig_hi_;
  std::vector<int> col_start_, col_row_;
  std::vector<double> col_val_;

  std::vector<double> x_;
  std::vector<int> basic_;
  std::vector<int> basic_pos_;
  std::vector<std::uint8_t> vstat_;

  // factorization-time snapshot
  DenseLu kernel_;
  std::vector<int> f_logical_pos_;  // row -> basis position of its logical, or -1
  std::vector<int> f_sb_pos_;       // kernel column -> basis position
  std::vector<int> f_sb_col_;       // kernel column -> structural column
  std::vector<int> f_dense_rows_;   // kernel row -> matrix row
  std::vector<int> f_dense_row_of_; // matrix row -> kernel row or -1
  std::vector<Eta> etas_;
  bool fact_valid_ = false;
  std::vector<double> scratch_rd_, scratch_ws_, scratch_w_, scratch_a_, scratch_u_;

  SolveStatus last_status_ = SolveStatus::kInfeasible;
  long total_iters_ = 0;
};

/// One-shot LP solve with polished duals. Deterministic for identical input.
/// Throws on numerical failure or iteration exhaustion.
inline LpSolution solve_lp(const Lp& lp, SimplexOptions opt = {}) {
  BoundedSimplex s(lp, opt);
  SolveStatus st = s.solve();
  if (st == SolveStatus::kIterationLimit)
    throw std::runtime_error("solve_lp: iteration limit exceeded");
  LpSolution sol = s.extract(true);
  sol.status = st;
  return sol;
}

}  // namespace trimarket
