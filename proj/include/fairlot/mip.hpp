#pragma once

#include <chrono>
#include <cmath>
#include <optional>
#include <vector>

#include "fairlot/simplex.hpp"

namespace fairlot {

enum class MipStatus {
  optimal,
  infeasible,
  bound_abort,     // proven that no solution reaches the abort threshold
  incumbent_stop,  // stopped early at a good-enough incumbent
  node_limit,
  time_limit,
  unbounded,
};

struct MipOptions {
  double int_tol = 1e-6;
  // Prune any subtree whose relaxation bound falls below this value; if the
  // search exhausts without an incumbent, status is bound_abort.
  std::optional<double> bound_abort;
  // Return as soon as an incumbent with objective >= this value is found.
  std::optional<double> incumbent_stop;
  bool stop_first_incumbent = false;
  long max_nodes = 5000000;
  double time_limit_s = kInf;
  SimplexOptions lp;
};

struct MipSolution {
  MipStatus status = MipStatus::infeasible;
  double objective = 0.0;
  std::vector<double> x;
  long nodes = 0;

  bool feasible() const {
    return status == MipStatus::optimal || status == MipStatus::incumbent_stop;
  }
};

namespace detail {

// Depth-first branch and bound over the dense simplex relaxation. Aimed at
// the small models this library produces; no presolve, no cut generation.
class BranchAndBound {
 public:
  BranchAndBound(const LinearProgram& lp, const std::vector<bool>& is_integer,
                 const MipOptions& opt)
      : lp_(lp), is_integer_(is_integer), opt_(opt) {
    work_ = lp_;
    if (!lp_.maximize) {
      // Internally always maximize.
      for (double& c : work_.objective) c = -c;
      work_.maximize = true;
      flipped_ = true;
    }
    has_continuous_ = false;
    for (int j = 0; j < work_.num_vars(); ++j)
      if (!is_integer_[j]) has_continuous_ = true;
    if (opt_.time_limit_s < 1e15)
      deadline_ = std::chrono::steady_clock::now() +
                  std::chrono::duration_cast<std::chrono::steady_clock::duration>(
                      std::chrono::duration<double>(opt_.time_limit_s));
    else
      deadline_ = std::chrono::steady_clock::time_point::max();
  }

  MipSolution run() {
    MipSolution out;
    dive();
    out.nodes = nodes_;
    if (stop_reason_ == MipStatus::unbounded) {
      out.status = MipStatus::unbounded;
      return out;
    }
    if (have_incumbent_) {
      out.status = stopped_early_ ? MipStatus::incumbent_stop : MipStatus::optimal;
      out.objective = flipped_ ? -incumbent_obj_ : incumbent_obj_;
      out.x = incumbent_;
      // node/time limits with an incumbent still report it, but not as proven
      if (stop_reason_ == MipStatus::node_limit || stop_reason_ == MipStatus::time_limit)
        out.status = stop_reason_;
      return out;
    }
    if (stop_reason_ == MipStatus::node_limit || stop_reason_ == MipStatus::time_limit)
      out.status = stop_reason_;
    else
      out.status = aborted_ ? MipStatus::bound_abort : MipStatus::infeasible;
    return out;
  }

 private:
  const LinearProgram& lp_;
  const std::vector<bool>& is_integer_;
  const MipOptions& opt_;
  LinearProgram work_;
  bool flipped_ = false;
  bool has_continuous_ = false;

  std::vector<double> incumbent_;
  double incumbent_obj_ = -kInf;
  bool have_incumbent_ = false;
  bool stopped_early_ = false;
  bool aborted_ = false;
  long nodes_ = 0;
  MipStatus stop_reason_ = MipStatus::optimal;
  std::chrono::steady_clock::time_point deadline_;

  bool should_stop() const {
    return stopped_early_ || stop_reason_ == MipStatus::node_limit ||
           stop_reason_ == MipStatus::time_limit || stop_reason_ == MipStatus::unbounded;
  }

  void dive() {
    if (should_stop()) return;
    if (++nodes_ > opt_.max_nodes) {
      stop_reason_ = MipStatus::node_limit;
      return;
    }
    if ((nodes_ & 63) == 0 && std::chrono::steady_clock::now() > deadline_) {
      stop_reason_ = MipStatus::time_limit;
      return;
    }

    LpSolution rel = solve_lp(work_, opt_.lp);
    if (rel.status == LpStatus::infeasible) return;
    if (rel.status == LpStatus::unbounded) {
      stop_reason_ = MipStatus::unbounded;
      return;
    }
    if (rel.status == LpStatus::iteration_limit) {
      stop_reason_ = MipStatus::node_limit;
      return;
    }

    double bound = rel.objective;
    if (opt_.bound_abort) {
      double thr = flipped_ ? -(*opt_.bound_abort) : *opt_.bound_abort;
      if (bound < thr) {
        aborted_ = true;
        return;
      }
    }
    if (have_incumbent_ && bound <= incumbent_obj_ + 1e-9 * (1.0 + std::abs(incumbent_obj_)))
      return;

    int branch_var = -1;
    double best_frac_score = -1.0;
    for (int j = 0; j < work_.num_vars(); ++j) {
      if (!is_integer_[j]) continue;
      double v = rel.x[j];
      double frac = v - std::floor(v);
      double dist = std::min(frac, 1.0 - frac);
      if (dist > opt_.int_tol && dist > best_frac_score) {
        best_frac_score = dist;
        branch_var = j;
      }
    }

    if (branch_var < 0) {
      accept_candidate(rel);
      return;
    }

    double v = rel.x[branch_var];
    double lo = work_.lower[branch_var];
    double hi = work_.upper[branch_var];
    double fl = std::floor(v), ce = std::ceil(v);
    bool down_first = (v - fl) < 0.5;

    auto explore = [&](double nlo, double nhi) {
      if (nlo > nhi + 1e-12) return;
      work_.lower[branch_var] = nlo;
      work_.upper[branch_var] = nhi;
      dive();
      work_.lower[branch_var] = lo;
      work_.upper[branch_var] = hi;
    };
    if (down_first) {
      explore(lo, fl);
      explore(ce, hi);
    } else {
      explore(ce, hi);
      explore(lo, fl);
    }
  }

  void accept_candidate(const LpSolution& rel) {
    std::vector<double> x = rel.x;
    double obj;
    if (has_continuous_) {
      // Fix the integer variables and reoptimize the continuous part so the
      // reported point is exactly feasible and optimal for that assignment.
      LinearProgram fixed = work_;
      for (int j = 0; j < work_.num_vars(); ++j) {
        if (!is_integer_[j]) continue;
        double r = std::round(x[j]);
        fixed.lower[j] = r;
        fixed.upper[j] = r;
      }
      LpSolution res = solve_lp(fixed, opt_.lp);
      if (!res.ok()) return;  // tolerance artifact; treat as infeasible leaf
      x = res.x;
      obj = res.objective;
    } else {
      for (int j = 0; j < work_.num_vars(); ++j)
        if (is_integer_[j]) x[j] = std::round(x[j]);
      obj = 0.0;
      for (int j = 0; j < work_.num_vars(); ++j) obj += work_.objective[j] * x[j];
    }

    if (!have_incumbent_ || obj > incumbent_obj_) {
      have_incumbent_ = true;
      incumbent_obj_ = obj;
      incumbent_ = std::move(x);
      if (opt_.stop_first_incumbent) {
        stopped_early_ = true;
        return;
      }
      if (opt_.incumbent_stop) {
        double thr = flipped_ ? -(*opt_.incumbent_stop) : *opt_.incumbent_stop;
        if (incumbent_obj_ >= thr) stopped_early_ = true;
      }
    }
  }
};

}  // namespace detail

inline MipSolution solve_mip(const LinearProgram& lp, const std::vector<bool>& is_integer,
                             const MipOptions& opt = {}) {
  detail::BranchAndBound bb(lp, is_integer, opt);
  return bb.run();
}

}  // namespace fairlot
