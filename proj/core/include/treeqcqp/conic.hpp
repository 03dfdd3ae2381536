#pragma once

#include <functional>
#include <string>
#include <vector>

#include "treeqcqp/hermitian.hpp"

namespace treeqcqp {

enum class SdpStatus { optimal, infeasible, unbounded, max_iters, numerical_failure };

std::string to_string(SdpStatus s);

struct SymTriplet {
  int row;
  int col;
  double value;
};

/// Sparse symmetric matrix stored by its upper triangle (row <= col).
struct SparseSym {
  int dim = 0;
  std::vector<SymTriplet> upper;

  void add(int r, int c, double v);
  double dot(const RMatrix& x) const;
  void accumulate(RMatrix& out, double scale) const;
  double frobenius_norm() const;
  RMatrix dense() const;
};

/// min <C, X> + c^T u  s.t.  <A_i, X> + a_i^T u = b_i,  X psd,  u >= 0.
struct ConicProblem {
  int dim = 0;
  RMatrix cost;
  RVector linear_cost;
  std::vector<SparseSym> rows;
  RVector rhs;
  /// Linear coefficients as (row, variable, value).
  struct LinearEntry {
    int row;
    int var;
    double value;
  };
  std::vector<LinearEntry> linear;

  int row_count() const { return static_cast<int>(rows.size()); }
  int linear_count() const { return static_cast<int>(linear_cost.size()); }
};

struct ConicIterate {
  int iteration;
  double primal_obj;
  double dual_obj;
  double primal_infeas;
  double dual_infeas;
  double gap;
  double mu;
  double step_primal;
  double step_dual;
};

struct ConicOptions {
  double tol_gap = 1e-8;
  double tol_feas = 1e-8;
  int max_iters = 200;
  std::function<void(const ConicIterate&)> trace;
};

struct ConicSolution {
  SdpStatus status = SdpStatus::numerical_failure;
  RMatrix x;
  RMatrix z;
  RVector y;
  RVector u;
  RVector zu;
  double primal_obj = 0.0;
  double dual_obj = 0.0;
  double primal_infeas = 0.0;
  double dual_infeas = 0.0;
  double gap = 0.0;
  int iterations = 0;
};

/// Primal-dual interior-point method with Nesterov-Todd scaling and a
/// Mehrotra predictor-corrector. Infeasible start; infeasibility and
/// unboundedness are inferred from diverging dual or primal objectives.
ConicSolution solve_conic(const ConicProblem& p, const ConicOptions& opt = {});

}  // namespace treeqcqp
