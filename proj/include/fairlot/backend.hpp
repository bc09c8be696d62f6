#pragma once

#include "fairlot/mip.hpp"
#include "fairlot/model.hpp"

namespace fairlot {

/// Solver contract the rest of the library is written against: a MIP solve
/// with optional early aborts, and an LP solve that reports row duals. A
/// backend handle is confined to one thread; concurrent solves need
/// independent handles.
class SolverBackend {
 public:
  virtual ~SolverBackend() = default;

  virtual MipSolution solve_mip(const LinearProgram& lp, const std::vector<bool>& is_integer,
                                const MipOptions& opt) = 0;
  virtual LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opt) = 0;
};

/// Self-contained dense simplex + branch-and-bound backend.
class BuiltinBackend final : public SolverBackend {
 public:
  MipSolution solve_mip(const LinearProgram& lp, const std::vector<bool>& is_integer,
                        const MipOptions& opt) override {
    return fairlot::solve_mip(lp, is_integer, opt);
  }

  LpSolution solve_lp(const LinearProgram& lp, const SimplexOptions& opt) override {
    return fairlot::solve_lp(lp, opt);
  }
};

inline SolverBackend& builtin_backend() {
  thread_local BuiltinBackend backend;
  return backend;
}

}  // namespace fairlot
