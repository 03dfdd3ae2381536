#pragma once

#include <limits>
#include <string>
#include <utility>
#include <vector>

#include "treeqcqp/graph.hpp"
#include "treeqcqp/hermitian.hpp"

namespace treeqcqp {

inline constexpr double kInf = std::numeric_limits<double>::infinity();
inline constexpr double kTauLp = 1e-9;

/// One row x^H C_k x <= b_k. An infinite bound marks a removed inequality.
struct Constraint {
  HermitianMatrix matrix;
  double upper = kInf;
  std::string label;

  bool active() const { return upper < kInf; }
};

/// minimize x^H C x subject to x^H C_k x <= b_k.
struct QcqpProblem {
  int n = 1;
  HermitianMatrix objective{1};
  std::vector<Constraint> constraints;
  /// (lower row, upper row) index pairs forming two-sided bounds.
  std::vector<std::pair<int, int>> pairs;
  /// Caller assertion that the feasible set is bounded.
  bool assert_bounded = false;

  /// Throws ValidationError on dimension mismatch, NaN bounds, bounds of
  /// -inf, bad pair indices, or a non-PSD objective.
  void validate() const;
  std::vector<int> active_indices() const;
  /// C positive definite (rho_min above the PSD tolerance band).
  bool objective_definite() const;

  double objective_value(const CVector& x) const { return objective.quadratic_form(x); }
};

ProblemGraph extract_graph(const QcqpProblem& p, double tau_zero = kTauZero);

struct RelintResult {
  bool in_relint = false;
  bool on_boundary = false;
  bool feasible = false;
  double t_star = -kInf;
  /// Strictly positive weights summing to 1 with sum a_l u_l = 0 when
  /// feasible; empty otherwise.
  RVector weights;
};

/// Decides whether 0 lies in the relative interior of conv(points), i.e.
/// whether some a >> 0, sum a = 1 has sum a_l u_l = 0.
RelintResult origin_in_relint(const std::vector<Complex>& points, double tau_lp = kTauLp);

struct EdgeReport {
  ProblemGraph::Edge edge;
  std::vector<Complex> points;
  RelintResult relint;
};

struct ConditionReport {
  bool is_tree = false;
  ProblemGraph graph;
  std::vector<EdgeReport> per_edge;
  bool bounded_hint = false;
  bool pass = false;
  std::vector<ProblemGraph::Edge> offending_edges;
};

/// Point set {C_ij} + {[C_k]_ij : k active} for one edge.
std::vector<Complex> edge_points(const QcqpProblem& p, int i, int j, double tau_zero = kTauZero);

ConditionReport check_condition1(const QcqpProblem& p, double tau_zero = kTauZero);

/// Sufficient syntactic test: every coordinate is capped by an active
/// nonnegative diagonal row, or some active row is positive definite.
bool syntactic_bounded(const QcqpProblem& p);

}  // namespace treeqcqp
