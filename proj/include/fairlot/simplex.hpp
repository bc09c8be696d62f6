#pragma once

#include <algorithm>
#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>
#include <utility>
#include <vector>

namespace fairlot {

constexpr double kInf = std::numeric_limits<double>::infinity();

enum class Rel { le, eq, ge };

/// One linear constraint, sparse over variable indices.
struct LinearRow {
  std::vector<std::pair<int, double>> coeffs;
  Rel rel = Rel::le;
  double rhs = 0.0;
};

/// Bounded linear program. Every variable must have a finite lower bound;
/// upper bounds may be +inf.
struct LinearProgram {
  bool maximize = true;
  std::vector<double> objective;
  std::vector<double> lower;
  std::vector<double> upper;
  std::vector<LinearRow> rows;

  int num_vars() const { return static_cast<int>(objective.size()); }

  int add_var(double obj, double lo, double hi) {
    objective.push_back(obj);
    lower.push_back(lo);
    upper.push_back(hi);
    return num_vars() - 1;
  }

  void add_row(std::vector<std::pair<int, double>> coeffs, Rel rel, double rhs) {
    rows.push_back(LinearRow{std::move(coeffs), rel, rhs});
  }
};

enum class LpStatus { optimal, infeasible, unbounded, iteration_limit };

/// Primal-dual result. `row_duals[i]` is the multiplier of row i, with signs
/// such that the reduced cost of column j is c_j - sum_i duals[i]*a_ij.
/// Under maximization, <= rows get duals >= 0 and >= rows get duals <= 0.
struct LpSolution {
  LpStatus status = LpStatus::infeasible;
  double objective = 0.0;
  std::vector<double> x;
  std::vector<double> row_duals;

  bool ok() const { return status == LpStatus::optimal; }
};

struct SimplexOptions {
  double feas_tol = 1e-9;
  double pivot_tol = 1e-9;
  double cost_tol = 1e-9;
  long max_iters = 500000;
  long stall_limit = 4000;  // switch to Bland's rule after this many non-improving pivots
};

namespace detail {

// Dense bounded-variable two-phase primal simplex. Problem sizes in this
// library are small (a few thousand columns, a few hundred rows), so a full
// tableau is both simple and fast enough.
class SimplexSolver {
 public:
  SimplexSolver(const LinearProgram& lp, const SimplexOptions& opt) : lp_(lp), opt_(opt) {}

  LpSolution solve() {
    LpSolution out;
    if (!setup(out)) return out;

    if (has_artificials_) {
      set_phase1_costs();
      LpStatus st = iterate();
      if (st == LpStatus::iteration_limit) {
        out.status = st;
        return out;
      }
      double infeas = 0.0;
      for (int i = 0; i < m_; ++i)
        if (is_artificial_[basis_[i]]) infeas += std::max(0.0, xb_[i]);
      if (infeas > opt_.feas_tol * (1.0 + b_scale_)) {
        out.status = LpStatus::infeasible;
        return out;
      }
      // Pin artificials at zero for phase 2.
      for (int j = 0; j < n_total_; ++j)
        if (is_artificial_[j]) ub_[j] = 0.0;
      for (int i = 0; i < m_; ++i)
        if (is_artificial_[basis_[i]] && std::abs(xb_[i]) <= opt_.feas_tol) xb_[i] = 0.0;
    }

    set_phase2_costs();
    LpStatus st = iterate();
    if (st != LpStatus::optimal) {
      out.status = st;
      return out;
    }
    extract(out);
    return out;
  }

 private:
  const LinearProgram& lp_;
  const SimplexOptions& opt_;

  int n_struct_ = 0, n_total_ = 0, m_ = 0;
  std::vector<double> tab_;     // m_ x n_total_, row-major
  std::vector<double> rc_;      // reduced costs, length n_total_
  std::vector<double> xb_;      // basic variable values
  std::vector<double> ub_;      // upper bounds in shifted space
  std::vector<double> cost_;    // current-phase costs
  std::vector<int> basis_;      // basic variable per row
  std::vector<char> in_basis_, at_upper_, is_artificial_;
  std::vector<double> shift_;   // structural lower bounds
  std::vector<double> row_sign_;
  std::vector<Rel> norm_rel_;   // relation after sign normalization
  std::vector<int> slack_col_, art_col_;  // per row, -1 if absent
  bool has_artificials_ = false;
  double b_scale_ = 1.0;
  double obj_ = 0.0;
  long iters_ = 0, stall_ = 0;
  bool bland_ = false;

  double& tab(int i, int j) { return tab_[static_cast<size_t>(i) * n_total_ + j]; }

  bool setup(LpSolution& out) {
    n_struct_ = lp_.num_vars();
    m_ = static_cast<int>(lp_.rows.size());
    shift_.resize(n_struct_);
    for (int j = 0; j < n_struct_; ++j) {
      if (!(lp_.lower[j] > -kInf))
        throw std::invalid_argument("simplex: variable " + std::to_string(j) +
                                    " lacks a finite lower bound");
      if (lp_.upper[j] < lp_.lower[j] - 1e-12) {
        out.status = LpStatus::infeasible;
        return false;
      }
      shift_[j] = lp_.lower[j];
    }

    // Shifted rhs, row signs so every rhs is nonnegative.
    std::vector<double> rhs(m_);
    row_sign_.assign(m_, 1.0);
    std::vector<Rel> rel(m_);
    for (int i = 0; i < m_; ++i) {
      double r = lp_.rows[i].rhs;
      for (auto [j, a] : lp_.rows[i].coeffs) {
        if (j < 0 || j >= n_struct_) throw std::invalid_argument("simplex: column index out of range");
        r -= a * shift_[j];
      }
      rel[i] = lp_.rows[i].rel;
      if (r < 0.0) {
        row_sign_[i] = -1.0;
        r = -r;
        if (rel[i] == Rel::le) rel[i] = Rel::ge;
        else if (rel[i] == Rel::ge) rel[i] = Rel::le;
      }
      rhs[i] = r;
      b_scale_ = std::max(b_scale_, r);
    }
    norm_rel_ = rel;

    slack_col_.assign(m_, -1);
    art_col_.assign(m_, -1);
    int extra = 0;
    for (int i = 0; i < m_; ++i) {
      if (rel[i] != Rel::eq) ++extra;           // slack or surplus
      if (rel[i] != Rel::le) ++extra;           // artificial for >= and =
    }
    n_total_ = n_struct_ + extra;

    tab_.assign(static_cast<size_t>(m_) * n_total_, 0.0);
    ub_.assign(n_total_, kInf);
    is_artificial_.assign(n_total_, 0);
    for (int j = 0; j < n_struct_; ++j)
      ub_[j] = lp_.upper[j] - lp_.lower[j];

    for (int i = 0; i < m_; ++i)
      for (auto [j, a] : lp_.rows[i].coeffs) tab(i, j) += row_sign_[i] * a;

    int next = n_struct_;
    basis_.assign(m_, -1);
    xb_ = rhs;
    for (int i = 0; i < m_; ++i) {
      if (rel[i] == Rel::le) {
        slack_col_[i] = next;
        tab(i, next) = 1.0;
        basis_[i] = next++;
      } else if (rel[i] == Rel::ge) {
        slack_col_[i] = next;
        tab(i, next) = -1.0;
        ++next;
        art_col_[i] = next;
        is_artificial_[next] = 1;
        tab(i, next) = 1.0;
        basis_[i] = next++;
        has_artificials_ = true;
      } else {
        art_col_[i] = next;
        is_artificial_[next] = 1;
        tab(i, next) = 1.0;
        basis_[i] = next++;
        has_artificials_ = true;
      }
    }

    in_basis_.assign(n_total_, 0);
    for (int i = 0; i < m_; ++i) in_basis_[basis_[i]] = 1;
    at_upper_.assign(n_total_, 0);
    cost_.assign(n_total_, 0.0);
    rc_.assign(n_total_, 0.0);
    return true;
  }

  void set_phase1_costs() {
    std::fill(cost_.begin(), cost_.end(), 0.0);
    for (int j = 0; j < n_total_; ++j)
      if (is_artificial_[j]) cost_[j] = -1.0;
    reset_reduced_costs();
  }

  void set_phase2_costs() {
    std::fill(cost_.begin(), cost_.end(), 0.0);
    double sgn = lp_.maximize ? 1.0 : -1.0;
    for (int j = 0; j < n_struct_; ++j) cost_[j] = sgn * lp_.objective[j];
    reset_reduced_costs();
    bland_ = false;
    stall_ = 0;
  }

  void reset_reduced_costs() {
    // rc = c - c_B * T
    for (int j = 0; j < n_total_; ++j) rc_[j] = cost_[j];
    for (int i = 0; i < m_; ++i) {
      double cb = cost_[basis_[i]];
      if (cb == 0.0) continue;
      const double* row = &tab_[static_cast<size_t>(i) * n_total_];
      for (int j = 0; j < n_total_; ++j) rc_[j] -= cb * row[j];
    }
    for (int i = 0; i < m_; ++i) rc_[basis_[i]] = 0.0;
    obj_ = 0.0;
    for (int i = 0; i < m_; ++i) obj_ += cost_[basis_[i]] * xb_[i];
    for (int j = 0; j < n_total_; ++j)
      if (at_upper_[j] && !in_basis_[j]) obj_ += cost_[j] * ub_[j];
  }

  // One simplex phase with the current cost vector.
  LpStatus iterate() {
    while (true) {
      if (++iters_ > opt_.max_iters) return LpStatus::iteration_limit;

      int enter = -1;
      int dir = +1;
      double best = opt_.cost_tol;
      for (int j = 0; j < n_total_; ++j) {
        if (in_basis_[j] || ub_[j] <= 0.0) continue;  // fixed vars never move
        if (!at_upper_[j] && rc_[j] > best) {
          enter = j;
          dir = +1;
          if (bland_) break;
          best = rc_[j];
        } else if (at_upper_[j] && -rc_[j] > best) {
          enter = j;
          dir = -1;
          if (bland_) break;
          best = -rc_[j];
        }
      }
      if (enter < 0) return LpStatus::optimal;

      // Ratio test.
      double t = ub_[enter];  // own bound flip distance (may be inf)
      int leave_row = -1;
      bool leave_to_upper = false;
      for (int i = 0; i < m_; ++i) {
        double alpha = dir * tab(i, enter);
        double ti = kInf;
        bool to_upper = false;
        if (alpha > opt_.pivot_tol) {
          ti = std::max(0.0, xb_[i]) / alpha;
        } else if (alpha < -opt_.pivot_tol && ub_[basis_[i]] < kInf) {
          ti = std::max(0.0, ub_[basis_[i]] - xb_[i]) / (-alpha);
          to_upper = true;
        } else {
          continue;
        }
        bool better = ti < t - 1e-12;
        if (!better && ti < t + 1e-12 && leave_row >= 0) {
          if (bland_)
            better = basis_[i] < basis_[leave_row];
          else
            better = std::abs(tab(i, enter)) > std::abs(tab(leave_row, enter));
        }
        if (better || (leave_row < 0 && ti <= t)) {
          t = std::min(t, ti);
          leave_row = i;
          leave_to_upper = to_upper;
        }
      }

      if (t >= kInf) return LpStatus::unbounded;

      double gain = rc_[enter] * dir * t;
      if (gain <= opt_.cost_tol) {
        if (++stall_ > opt_.stall_limit) bland_ = true;
      } else {
        stall_ = 0;
      }
      obj_ += gain;

      if (leave_row < 0 || ub_[enter] <= t + 1e-12) {
        // Bound flip: the entering variable moves across its whole range.
        double step = dir * ub_[enter];
        for (int i = 0; i < m_; ++i) xb_[i] -= step * tab(i, enter);
        at_upper_[enter] = !at_upper_[enter];
        continue;
      }

      pivot(leave_row, enter, dir, t, leave_to_upper);
    }
  }

  void pivot(int p, int enter, int dir, double t, bool leave_to_upper) {
    int leave = basis_[p];
    for (int i = 0; i < m_; ++i)
      if (i != p) xb_[i] -= dir * t * tab(i, enter);
    xb_[p] = (dir > 0) ? t : ub_[enter] - t;

    at_upper_[leave] = leave_to_upper ? 1 : 0;
    in_basis_[leave] = 0;
    at_upper_[enter] = 0;
    in_basis_[enter] = 1;
    basis_[p] = enter;

    double piv = tab(p, enter);
    double* prow = &tab_[static_cast<size_t>(p) * n_total_];
    double inv = 1.0 / piv;
    for (int j = 0; j < n_total_; ++j) prow[j] *= inv;
    prow[enter] = 1.0;

    for (int i = 0; i < m_; ++i) {
      if (i == p) continue;
      double f = tab(i, enter);
      if (f == 0.0) continue;
      double* row = &tab_[static_cast<size_t>(i) * n_total_];
      for (int j = 0; j < n_total_; ++j) row[j] -= f * prow[j];
      row[enter] = 0.0;
    }
    double f = rc_[enter];
    if (f != 0.0) {
      for (int j = 0; j < n_total_; ++j) rc_[j] -= f * prow[j];
      rc_[enter] = 0.0;
    }
  }

  void extract(LpSolution& out) {
    reset_reduced_costs();  // clean rc against the final basis before reading duals
    std::vector<double> z(n_total_, 0.0);
    for (int j = 0; j < n_total_; ++j)
      if (at_upper_[j] && !in_basis_[j] && ub_[j] < kInf) z[j] = ub_[j];
    for (int i = 0; i < m_; ++i) z[basis_[i]] = xb_[i];

    out.x.resize(n_struct_);
    for (int j = 0; j < n_struct_; ++j) {
      double v = z[j] + shift_[j];
      v = std::min(std::max(v, lp_.lower[j]), lp_.upper[j] == kInf ? v : lp_.upper[j]);
      out.x[j] = v;
    }
    out.objective = 0.0;
    for (int j = 0; j < n_struct_; ++j) out.objective += lp_.objective[j] * out.x[j];

    // Row duals read off the reduced-cost row through each row's unit column.
    double sgn = lp_.maximize ? 1.0 : -1.0;
    out.row_duals.resize(m_);
    for (int i = 0; i < m_; ++i) {
      int col = art_col_[i] >= 0 ? art_col_[i] : slack_col_[i];
      double coef = tab_unit_coef(i, col);
      out.row_duals[i] = sgn * row_sign_[i] * (-rc_[col]) / coef;
    }
    out.status = LpStatus::optimal;
  }

  // Coefficient the unit column has in the normalized matrix.
  double tab_unit_coef(int i, int col) const {
    if (art_col_[i] == col) return 1.0;
    return norm_rel_[i] == Rel::ge ? -1.0 : 1.0;
  }
};

}  // namespace detail

inline LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opt = {}) {
  detail::SimplexSolver solver(lp, opt);
  return solver.solve();
}

}  // namespace fairlot
