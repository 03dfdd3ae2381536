#pragma once

#include <memory>
#include <optional>
#include <vector>

#include "treeqcqp/hermitian.hpp"
#include "treeqcqp/qcqp.hpp"

namespace treeqcqp {

/// Real coordinates p for the complex decision vector x(p).
class Parametrization {
 public:
  virtual ~Parametrization() = default;
  virtual int size() const = 0;
  virtual RVector params_of(const CVector& x) const = 0;
  virtual CVector point(const RVector& p) const = 0;
  /// Column j holds dx/dp_j.
  virtual CMatrix jacobian(const RVector& p) const = 0;
};

/// Real and imaginary parts with the gauge entry kept real.
class CartesianParametrization : public Parametrization {
 public:
  CartesianParametrization(int n, int gauge) : n_(n), gauge_(gauge) {}
  int size() const override { return 2 * n_ - 1; }
  RVector params_of(const CVector& x) const override;
  CVector point(const RVector& p) const override;
  CMatrix jacobian(const RVector& p) const override;

 private:
  int n_;
  int gauge_;
};

/// Magnitudes and angles of every entry except the gauge entry, which is
/// held at a fixed real magnitude.
class PolarParametrization : public Parametrization {
 public:
  PolarParametrization(int n, int gauge, double gauge_magnitude)
      : n_(n), gauge_(gauge), gauge_magnitude_(gauge_magnitude) {}
  int size() const override { return 2 * (n_ - 1); }
  RVector params_of(const CVector& x) const override;
  CVector point(const RVector& p) const override;
  CMatrix jacobian(const RVector& p) const override;

 private:
  int n_;
  int gauge_;
  double gauge_magnitude_;
};

enum class StartMode { trace_scale, rank1_approx };

struct HeuristicConfig {
  double gamma = kInf;
  int max_outer_iters = 50;
  int max_inner_iters = 500;
  double projection_tol = 1e-12;
  double tol_feas = 1e-8;
  StartMode start_mode = StartMode::rank1_approx;
};

enum class HeuristicOutcome { feasible, exhausted };

struct HeuristicResult {
  std::optional<CVector> x_tilde;
  int iterations = 0;
  std::optional<double> eta;
  double objective = 0.0;
  std::vector<double> violation_trace;
  HeuristicOutcome outcome = HeuristicOutcome::exhausted;
  bool inner_warning = false;
};

/// Unit phase that makes x(gauge) real and nonnegative; falls back to the
/// largest-modulus entry when x(gauge) vanishes.
CVector gauge_fix(const CVector& x, int gauge = 0);

CVector initial_point(const HermitianMatrix& w, const HermitianMatrix& c, StartMode mode, int gauge = 0);

struct Violations {
  RVector per_constraint;
  double total = 0.0;
  bool feasible = true;
};

/// max(0, x^H C_k x - b_k) per constraint (0 for removed rows); total is the
/// sum of squares.
Violations quadratic_violations(const QcqpProblem& p, const CVector& x, double tol_feas = 1e-8);

/// Sum of squared hinge violations of the constraints linearized at x_m,
/// evaluated at x.
double linearize_violation(const QcqpProblem& p, const CVector& x_m, const CVector& x);

/// Euclidean projection of v onto {d : ||d||_1 <= radius}.
RVector project_l1_ball(const RVector& v, double radius);

struct StepResult {
  RVector params;
  double start_value = 0.0;
  double end_value = 0.0;
  int inner_iterations = 0;
  bool warning = false;
  std::vector<double> trace;
};

/// One outer iteration: minimizes the linearized violation over the l1 ball
/// of radius gamma around p_m in parameter space.
StepResult heuristic_step(const QcqpProblem& p, const Parametrization& param, const RVector& p_m,
                          const HeuristicConfig& cfg);

/// Convenience form in the Cartesian parametrization with gauge entry 0.
CVector heuristic_step(const QcqpProblem& p, const CVector& x_m, const HeuristicConfig& cfg);

HeuristicResult restore_from_point(const QcqpProblem& p, const CVector& x0, double r_star,
                                   const HeuristicConfig& cfg, const Parametrization& param);

HeuristicResult restore_feasibility(const QcqpProblem& p, const HermitianMatrix& w_star, double r_star,
                                    const HeuristicConfig& cfg = {},
                                    const Parametrization* param = nullptr);

}  // namespace treeqcqp
