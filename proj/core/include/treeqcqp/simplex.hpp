#pragma once

#include "treeqcqp/hermitian.hpp"

namespace treeqcqp {

enum class LpStatus { optimal, infeasible, unbounded };

struct LpResult {
  LpStatus status = LpStatus::infeasible;
  RVector x;
  double objective = 0.0;
  int pivots = 0;
};

/// maximize c^T x  subject to  A x = b, x >= 0.
///
/// Dense two-phase tableau simplex with Bland's anti-cycling rule. Intended
/// for tiny programs (tens of variables, a handful of rows) where exact
/// combinatorial behaviour matters more than speed.
LpResult solve_lp_max(const RMatrix& a, const RVector& b, const RVector& c,
                      double pivot_tol = 1e-11);

}  // namespace treeqcqp
