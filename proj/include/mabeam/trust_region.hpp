#pragma once

#include "mabeam/types.hpp"

namespace mabeam::model {

struct TrsResult {
  VecXd minimizer;
  double value = 0.0;       // q(d*) = d'Hd + 2c'd
  double multiplier = 0.0;  // nu >= 0 with (H + nu I) psd
  bool hard_case = false;
};

// Exact global minimizer of q(d) = d'Hd + 2c'd over ||d|| <= radius, for
// symmetric (possibly indefinite) H. Eigendecomposition plus safeguarded
// root-finding on the secular equation; handles the More-Sorensen hard case.
TrsResult solve_trust_region(const MatXd& hessian, const VecXd& linear, double radius);

}  // namespace mabeam::model
