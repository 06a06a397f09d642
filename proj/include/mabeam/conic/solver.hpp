#pragma once

#include <string>

#include "mabeam/conic/program.hpp"
#include "mabeam/types.hpp"

namespace mabeam::conic {

enum class SolveStatus { kOptimal, kPrimalInfeasible, kDualInfeasible, kMaxIter };

std::string to_string(SolveStatus s);

struct SolverOptions {
  double feastol = 1e-8;
  double abstol = 1e-8;
  double reltol = 1e-8;
  int max_iter = 200;
  bool equilibrate = true;
  int verbose = 0;
};

struct SolveResult {
  SolveStatus status = SolveStatus::kMaxIter;
  VecXd x;          // primal point (certificate of unboundedness when dual infeasible)
  VecXd y;          // duals of zero-cone rows (certificate when primal infeasible)
  VecXd z;          // duals of the remaining cone rows
  VecXd s;          // slacks of the remaining cone rows
  double objective = 0.0;  // c'x + c0
  double pres = 0.0, dres = 0.0, gap = 0.0;
  int iterations = 0;

  bool ok() const { return status == SolveStatus::kOptimal; }
};

// Primal-dual interior-point method (Nesterov-Todd scaling, Mehrotra
// predictor-corrector) on the homogeneous self-dual embedding. Supports the
// zero, nonnegative, second-order and semidefinite cones and reports
// infeasibility via certificates. Deterministic given inputs.
SolveResult solve(const ConicProgram& program, const SolverOptions& options = {});

}  // namespace mabeam::conic
