#include "treeqcqp/qcqp.hpp"

#include <cmath>
#include <string>

#include "treeqcqp/errors.hpp"
#include "treeqcqp/simplex.hpp"

namespace treeqcqp {

void QcqpProblem::validate() const {
  if (n < 1) throw ValidationError("problem dimension must be positive");
  if (objective.dim() != n) throw ValidationError("objective dimension does not match n");
  for (size_t k = 0; k < constraints.size(); ++k) {
    const auto& c = constraints[k];
    if (c.matrix.dim() != n)
      throw ValidationError("constraint " + std::to_string(k) + " dimension does not match n");
    if (std::isnan(c.upper) || c.upper == -kInf)
      throw ValidationError("constraint " + std::to_string(k) + " has an invalid bound");
  }
  const int m = static_cast<int>(constraints.size());
  for (const auto& [lo, hi] : pairs)
    if (lo < 0 || hi < 0 || lo >= m || hi >= m || lo == hi)
      throw ValidationError("constraint pair refers to an invalid row");
  if (!is_psd(objective))
    throw ValidationError("objective matrix is not positive semidefinite");
}

std::vector<int> QcqpProblem::active_indices() const {
  std::vector<int> out;
  for (size_t k = 0; k < constraints.size(); ++k)
    if (constraints[k].active()) out.push_back(static_cast<int>(k));
  return out;
}

bool QcqpProblem::objective_definite() const {
  const double lo = min_eigenvalue(objective);
  return lo > kTauPsd * (1.0 + spectral_norm(objective));
}

ProblemGraph extract_graph(const QcqpProblem& p, double tau_zero) {
  std::vector<ProblemGraph::Edge> edges;
  auto scan = [&](const HermitianMatrix& h) {
    for (int j = 1; j < p.n; ++j)
      for (int i = 0; i < j; ++i)
        if (std::abs(h(i, j)) > tau_zero) edges.emplace_back(i, j);
  };
  scan(p.objective);
  for (const auto& c : p.constraints)
    if (c.active()) scan(c.matrix);
  return ProblemGraph(p.n, edges);
}

RelintResult origin_in_relint(const std::vector<Complex>& points, double tau_lp) {
  if (points.empty()) throw ValidationError("origin_in_relint: empty point list");
  const int r = static_cast<int>(points.size());

  // Membership is invariant under positive rescaling of individual points,
  // so solve on unit-modulus copies and map the weights back.
  std::vector<double> mod(static_cast<size_t>(r));
  std::vector<Complex> unit(static_cast<size_t>(r));
  for (int l = 0; l < r; ++l) {
    mod[static_cast<size_t>(l)] = std::abs(points[static_cast<size_t>(l)]);
    unit[static_cast<size_t>(l)] = mod[static_cast<size_t>(l)] > 0
                                       ? points[static_cast<size_t>(l)] / mod[static_cast<size_t>(l)]
                                       : Complex(0.0);
  }

  // a_l = t + s_l, s >= 0, t = tp - tm.
  RMatrix a = RMatrix::Zero(3, r + 2);
  RVector b = RVector::Zero(3);
  RVector c = RVector::Zero(r + 2);
  Complex sum(0.0);
  for (int l = 0; l < r; ++l) {
    const Complex u = unit[static_cast<size_t>(l)];
    a(0, l) = u.real();
    a(1, l) = u.imag();
    a(2, l) = 1.0;
    sum += u;
  }
  a(0, r) = sum.real();
  a(0, r + 1) = -sum.real();
  a(1, r) = sum.imag();
  a(1, r + 1) = -sum.imag();
  a(2, r) = r;
  a(2, r + 1) = -r;
  b(2) = 1.0;
  c(r) = 1.0;
  c(r + 1) = -1.0;

  const LpResult lp = solve_lp_max(a, b, c);
  RelintResult out;
  if (lp.status != LpStatus::optimal) return out;
  out.feasible = true;
  out.t_star = lp.objective;
  out.in_relint = out.t_star > tau_lp;
  out.on_boundary = out.t_star >= -tau_lp && out.t_star <= tau_lp;

  RVector w(r);
  for (int l = 0; l < r; ++l) {
    const double al = out.t_star + lp.x(l);
    const double m = mod[static_cast<size_t>(l)];
    w(l) = m > 0 ? al / m : al;
  }
  const double total = w.sum();
  if (total != 0.0) w /= total;
  out.weights = w;
  return out;
}

std::vector<Complex> edge_points(const QcqpProblem& p, int i, int j, double tau_zero) {
  auto clean = [tau_zero](Complex z) { return std::abs(z) > tau_zero ? z : Complex(0.0); };
  std::vector<Complex> pts{clean(p.objective(i, j))};
  for (const auto& c : p.constraints)
    if (c.active()) pts.push_back(clean(c.matrix(i, j)));
  return pts;
}

bool syntactic_bounded(const QcqpProblem& p) {
  std::vector<bool> covered(static_cast<size_t>(p.n), false);
  for (const auto& c : p.constraints) {
    if (!c.active()) continue;
    if (c.matrix.is_diagonal()) {
      const RVector d = c.matrix.matrix().diagonal().real();
      if (d.minCoeff() < 0) continue;
      for (int i = 0; i < p.n; ++i)
        if (d(i) > 0) covered[static_cast<size_t>(i)] = true;
    } else if (min_eigenvalue(c.matrix) > kTauPsd * (1.0 + spectral_norm(c.matrix))) {
      return true;
    }
  }
  for (bool b : covered)
    if (!b) return false;
  return true;
}

ConditionReport check_condition1(const QcqpProblem& p, double tau_zero) {
  ConditionReport rep;
  rep.graph = extract_graph(p, tau_zero);
  rep.is_tree = is_tree(rep.graph);
  for (const auto& e : rep.graph.edges()) {
    EdgeReport er;
    er.edge = e;
    er.points = edge_points(p, e.first, e.second, tau_zero);
    er.relint = origin_in_relint(er.points);
    if (er.relint.in_relint) rep.offending_edges.push_back(e);
    rep.per_edge.push_back(std::move(er));
  }
  rep.bounded_hint = p.assert_bounded || syntactic_bounded(p);
  rep.pass = rep.is_tree && rep.offending_edges.empty();
  return rep;
}

}  // namespace treeqcqp
