#pragma once

#include "treeqcqp/opf.hpp"
#include "treeqcqp/qcqp.hpp"

namespace fixture {

using treeqcqp::Complex;
using treeqcqp::HermitianMatrix;
using treeqcqp::Line;
using treeqcqp::PowerNetwork;
using treeqcqp::QcqpProblem;

/// min |x1|^2 + |x2|^2 with |x_i|^2 >= lo_i and a loose coupling row.
/// Every phase difference is optimal, so RP has a rank-2 optimum.
inline QcqpProblem tie_problem(double lo1, double lo2, Complex coupling, double loose) {
  QcqpProblem p;
  p.n = 2;
  p.objective = HermitianMatrix::identity(2);
  HermitianMatrix e1(2), e2(2), m(2);
  e1.set(0, 0, -1.0);
  e2.set(1, 1, -1.0);
  m.set(0, 1, coupling);
  p.constraints.push_back({e1, -lo1, "lo1"});
  p.constraints.push_back({e2, -lo2, "lo2"});
  p.constraints.push_back({m, loose, "edge"});
  return p;
}

/// Substation plus one load bus of 0.3 + 0.1i p.u.
inline PowerNetwork two_bus(double g, double b) {
  PowerNetwork net;
  net.buses.resize(2);
  net.buses[0].id = 1;
  net.buses[0].p_gen_min = -10.0;
  net.buses[0].p_gen_max = 10.0;
  net.buses[0].q_gen_min = -10.0;
  net.buses[0].q_gen_max = 10.0;
  net.buses[1].id = 2;
  net.buses[1].p_demand = 0.3;
  net.buses[1].q_demand = 0.1;
  net.buses[1].p_gen_min = 0.0;
  net.buses[1].p_gen_max = 0.0;
  net.buses[1].q_gen_min = 0.0;
  net.buses[1].q_gen_max = 0.0;
  net.lines.push_back({0, 1, g, b, 5.0, 5.0});
  return net;
}

/// Every bound finite, so all matrices of the full OPF set are active.
inline PowerNetwork with_finite_bounds(PowerNetwork net) {
  for (auto& b : net.buses) {
    b.p_gen_min = -1.0;
    b.p_gen_max = 1.0;
    b.q_gen_min = -1.0;
    b.q_gen_max = 1.0;
  }
  for (auto& l : net.lines) {
    l.f_max = 2.0;
    l.l_max = 1.0;
  }
  return net;
}

// Off-diagonal entries of Phi_k, Psi_k and the flow matrices, written out
// per line from g and b alone.

inline Complex phi_entry(const PowerNetwork& net, int k, int i, int j) {
  const int l = net.line_between(i, j);
  if (l < 0) return 0.0;
  const Line& ln = net.lines[static_cast<size_t>(l)];
  if (k == i) return 0.5 * Complex(-ln.g, ln.b);
  if (k == j) return 0.5 * Complex(-ln.g, -ln.b);
  return 0.0;
}

inline Complex psi_entry(const PowerNetwork& net, int k, int i, int j) {
  const int l = net.line_between(i, j);
  if (l < 0) return 0.0;
  const Line& ln = net.lines[static_cast<size_t>(l)];
  if (k == i) return 0.5 * Complex(-ln.b, -ln.g);
  if (k == j) return 0.5 * Complex(-ln.b, ln.g);
  return 0.0;
}

inline Complex m_entry(const Line& ln, int p, int q, int i, int j) {
  if (i == p && j == p) return ln.g;
  if (i == p && j == q) return 0.5 * Complex(-ln.g, ln.b);
  if (i == q && j == p) return 0.5 * Complex(-ln.g, -ln.b);
  return 0.0;
}

inline Complex t_entry(const Line& ln, int p, int q, int i, int j) {
  if (i == j && (i == p || i == q)) return ln.g;
  if ((i == p && j == q) || (i == q && j == p)) return -ln.g;
  return 0.0;
}

}  // namespace fixture
