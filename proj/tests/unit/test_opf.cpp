#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"
#include "treeqcqp/errors.hpp"
#include "treeqcqp/opf.hpp"

using namespace treeqcqp;
using namespace fixture;

namespace {

const Complex I(0.0, 1.0);

}  // namespace

TEST(Admittance, TwoBus) {
  const CMatrix y = build_admittance(two_bus(1.0, 0.5));
  const Complex a(1.0, -0.5);
  EXPECT_EQ(y(0, 0), a);
  EXPECT_EQ(y(1, 1), a);
  EXPECT_EQ(y(0, 1), -a);
  EXPECT_EQ(y(1, 0), -a);
}

TEST(Admittance, RowSumsAreShunts) {
  std::mt19937_64 rng(2);
  const PowerNetwork net = oracle::random_network(7, rng);
  const CMatrix y = build_admittance(net);
  EXPECT_LT((y - y.transpose()).norm(), 1e-15);
  for (int k = 0; k < 7; ++k) EXPECT_NEAR(std::abs(y.row(k).sum() - net.buses[static_cast<size_t>(k)].shunt), 0.0, 1e-14);
  PowerNetwork iso;
  iso.buses.resize(1);
  iso.buses[0].shunt = Complex(0.1, -0.2);
  EXPECT_EQ(build_admittance(iso)(0, 0), Complex(0.1, -0.2));
}

TEST(Admittance, DuplicateLineRejected) {
  PowerNetwork net = two_bus(1.0, 1.0);
  net.lines.push_back(net.lines[0]);
  EXPECT_THROW(build_admittance(net), ValidationError);
}

TEST(Injection, EntryExample) {
  PowerNetwork net = two_bus(2.0, 1.0);
  const auto m = build_injection_matrices(net, 0);
  EXPECT_NEAR(std::abs(m.phi(0, 1) - Complex(-1.0, 0.5)), 0.0, 1e-15);
  EXPECT_NEAR(std::abs(m.psi(0, 1) - Complex(-0.5, -1.0)), 0.0, 1e-15);
  EXPECT_EQ(m.j(0, 0), 1.0);
}

TEST(Injection, IsolatedBusIsZero) {
  PowerNetwork net = two_bus(2.0, 1.0);
  net.buses.push_back(net.buses[1]);
  net.buses[2].id = 3;
  const CMatrix y = build_admittance(net);
  const auto m = build_injection_matrices(y, 2);
  EXPECT_TRUE(m.phi.is_zero());
  EXPECT_TRUE(m.psi.is_zero());
}

TEST(Flow, EntryExample) {
  PowerNetwork net = two_bus(2.0, 1.0);
  const auto f = build_flow_matrices(net, 0, 1);
  EXPECT_EQ(f.t(0, 1), -2.0);
  EXPECT_EQ(f.t(0, 0), 2.0);
  EXPECT_EQ(f.t(1, 1), 2.0);
  const Spectrum s = eig_hermitian(f.t);
  EXPECT_NEAR(s.max(), 4.0, 1e-12);
  EXPECT_NEAR(s.min(), 0.0, 1e-12);
  EXPECT_THROW(build_flow_matrices(net, 0, 0), ValidationError);
}

TEST(Flow, FlatVoltageHasNoFlow) {
  std::mt19937_64 rng(3);
  const PowerNetwork net = oracle::random_network(6, rng);
  const CVector v = CVector::Ones(6);
  const PhysicalState s = recover_physical(v, net);
  for (Eigen::Index l = 0; l < s.p_from.size(); ++l) {
    EXPECT_NEAR(s.p_from(l), 0.0, 1e-14);
    EXPECT_NEAR(s.p_to(l), 0.0, 1e-14);
    EXPECT_NEAR(s.loss(l), 0.0, 1e-14);
  }
  // Only shunts draw power at flat voltage.
  for (int k = 0; k < 6; ++k) EXPECT_NEAR(s.p(k), net.buses[static_cast<size_t>(k)].shunt.real(), 1e-14);
}

TEST(Objective, Examples) {
  PowerNetwork net = two_bus(1.0, 0.5);
  net.buses.push_back(net.buses[1]);
  net.buses[2].id = 3;
  net.lines.push_back({1, 2, 1.0, 1.0, kInf, kInf});
  const OpfObjective v = build_objective(net, {ObjectiveKind::voltage, {}});
  EXPECT_EQ(v.c.matrix(), CMatrix::Identity(3, 3));
  EXPECT_TRUE(v.definite);

  const PowerNetwork two = two_bus(1.0, 0.5);
  const OpfObjective loss = build_objective(two, {ObjectiveKind::loss, {}});
  CMatrix expect(2, 2);
  expect << 1.0, -1.0, -1.0, 1.0;
  EXPECT_LT((loss.c.matrix() - expect).norm(), 1e-15);
  EXPECT_TRUE(loss.psd);
  EXPECT_FALSE(loss.definite);

  const PowerNetwork gb = two_bus(2.0, 3.0);
  const OpfObjective cost = build_objective(gb, {ObjectiveKind::cost, {1.0, 0.0}});
  EXPECT_NEAR(std::abs(cost.c(0, 1) - Complex(-1.0, 1.5)), 0.0, 1e-15);
  EXPECT_THROW(build_objective(gb, {ObjectiveKind::cost, {-1.0, 0.0}}), ValidationError);
}

TEST(Assemble, RowOrderAndGraph) {
  std::mt19937_64 rng(4);
  const PowerNetwork net = oracle::random_network(5, rng);
  const QcqpProblem p = assemble_opf(net, {ObjectiveKind::loss, {}});
  ASSERT_EQ(static_cast<int>(p.constraints.size()), 6 * 5 + 3 * 4);
  const CMatrix y = build_admittance(net);
  const auto m2 = build_injection_matrices(y, 2);
  EXPECT_EQ(p.constraints[static_cast<size_t>(bus_row(2, 0))].matrix.matrix(), m2.phi.matrix());
  EXPECT_EQ(p.constraints[static_cast<size_t>(bus_row(2, 3))].matrix.matrix(), (-m2.psi).matrix());
  EXPECT_EQ(p.constraints[static_cast<size_t>(bus_row(2, 5))].upper, -net.buses[2].w_min);
  const auto& ln = net.lines[1];
  const auto f = build_flow_matrices(net, ln.from, ln.to);
  EXPECT_EQ(p.constraints[static_cast<size_t>(line_row(5, 1, 2))].matrix.matrix(), f.t.matrix());
  EXPECT_EQ(extract_graph(p), net.graph());
  EXPECT_TRUE(p.assert_bounded);
}

TEST(Assemble, InfiniteGenerationLeavesVoltageRows) {
  PowerNetwork net = two_bus(1.0, 1.0);
  for (auto& b : net.buses) {
    b.p_gen_min = -kInf;
    b.p_gen_max = kInf;
    b.q_gen_min = -kInf;
    b.q_gen_max = kInf;
  }
  net.lines[0].f_max = kInf;
  net.lines[0].l_max = kInf;
  const QcqpProblem p = assemble_opf(net, {ObjectiveKind::voltage, {}});
  for (int k : p.active_indices()) EXPECT_EQ(k % 6 >= 4, true) << p.constraints[static_cast<size_t>(k)].label;
  EXPECT_EQ(p.active_indices().size(), 4u);
}

TEST(Condition, FullSetFailsWhenGAboveB) {
  const PowerNetwork net = with_finite_bounds(two_bus(2.0, 1.0));
  const OpfConditionReport r = check_opf_condition(net, {ObjectiveKind::voltage, {}});
  EXPECT_FALSE(r.condition.pass);
  ASSERT_EQ(r.suggestions.size(), 1u);
  EXPECT_NE(std::find(r.suggestions[0].patterns.begin(), r.suggestions[0].patterns.end(), Pattern::oversatisfaction),
            r.suggestions[0].patterns.end());
}

TEST(Condition, EdgePointsOfFullSet) {
  const PowerNetwork net = with_finite_bounds(two_bus(2.0, 1.0));
  const QcqpProblem p = assemble_opf(net, {ObjectiveKind::loss, {}});
  std::vector<Complex> got = edge_points(p, 0, 1);
  const double g = 2.0, b = 1.0;
  std::vector<Complex> expect = {Complex(-g, 0.0)};  // loss objective entry
  for (Complex z : {0.5 * Complex(-g, b), 0.5 * Complex(-g, -b), 0.5 * Complex(-b, -g), 0.5 * Complex(-b, g)}) {
    expect.push_back(z);
    expect.push_back(-z);
  }
  expect.push_back(0.5 * Complex(-g, b));
  expect.push_back(0.5 * Complex(-g, -b));
  expect.push_back(Complex(-g, 0.0));
  // Voltage rows contribute zero entries.
  for (int k = 0; k < 4; ++k) expect.push_back(0.0);
  auto key = [](Complex a, Complex c) { return a.real() != c.real() ? a.real() < c.real() : a.imag() < c.imag(); };
  std::sort(got.begin(), got.end(), key);
  std::sort(expect.begin(), expect.end(), key);
  ASSERT_EQ(got.size(), expect.size());
  for (size_t i = 0; i < got.size(); ++i) EXPECT_NEAR(std::abs(got[i] - expect[i]), 0.0, 1e-15);
}

TEST(Condition, OversatisfactionPasses) {
  for (auto [g, b] : {std::pair{2.0, 1.0}, std::pair{1.0, 2.0}, std::pair{1.0, 1.0}}) {
    const PowerNetwork net = apply_pattern(with_finite_bounds(two_bus(g, b)), Pattern::oversatisfaction);
    EXPECT_TRUE(check_opf_condition(net, {ObjectiveKind::loss, {}}).condition.pass) << g << " " << b;
  }
}

TEST(Condition, ExampleThreeOnBoundary) {
  const PowerNetwork net = apply_pattern(with_finite_bounds(two_bus(2.0, 1.0)), Pattern::example3);
  const OpfConditionReport r = check_opf_condition(net, {ObjectiveKind::voltage, {}});
  EXPECT_TRUE(r.condition.pass);
  ASSERT_EQ(r.condition.per_edge.size(), 1u);
  EXPECT_TRUE(r.condition.per_edge[0].relint.on_boundary);
}

TEST(Solve, InfeasibleVoltageDropReported) {
  // z = 0.4 + 0.2i needs about 0.15 p.u. of drop for this load.
  OpfSolveConfig cfg;
  cfg.pattern = Pattern::oversatisfaction;
  const OpfSolution sol = solve_opf(two_bus(2.0, 1.0), {ObjectiveKind::loss, {}}, cfg);
  EXPECT_FALSE(sol.feasible);
  EXPECT_EQ(sol.recovery.outcome, RecoveryOutcome::failed);
  ASSERT_FALSE(sol.recovery.stages.empty());
  EXPECT_EQ(sol.recovery.stages[0].solution.status, SdpStatus::infeasible);
}

TEST(Solve, TwoBusMatchesPolarGrid) {
  const PowerNetwork net = two_bus(20.0, 10.0);
  const ObjectiveSpec spec{ObjectiveKind::loss, {}};
  OpfSolveConfig cfg;
  cfg.pattern = Pattern::oversatisfaction;
  const OpfSolution sol = solve_opf(net, spec, cfg);
  ASSERT_TRUE(sol.condition);
  EXPECT_TRUE(sol.condition->condition.pass);
  EXPECT_EQ(sol.rank, 1);
  ASSERT_TRUE(sol.state);
  EXPECT_TRUE(sol.feasible);

  // |V| window from the voltage bounds; angles of a 0.3 p.u. transfer on z = 0.04 + 0.02i stay small.
  const oracle::PolarBox box{{0.95, 0.95, -0.3}, {1.05, 1.05, 0.3}};
  const oracle::GridResult g = oracle::polar_grid_minimize(sol.problem, 41, 12, box);
  const PhysicalState ref = recover_physical(g.x, apply_pattern(net, Pattern::oversatisfaction));
  EXPECT_NEAR(*sol.objective, g.value, 1e-3 * std::abs(g.value));
  for (int k = 0; k < 2; ++k) {
    EXPECT_NEAR(sol.state->vmag(k), ref.vmag(k), 1e-3);
    EXPECT_NEAR(sol.state->p(k), ref.p(k), 1e-3);
  }
}

TEST(OpfProperty, PowerIdentityAndPsdLoss) {
  std::mt19937_64 rng(555);
  int checked = 0;
  for (int tree = 0; tree < 50; ++tree) {
    const PowerNetwork net = oracle::random_network(5, rng);
    const CMatrix y = build_admittance(net);
    for (int t = 0; t < 20; ++t) {
      const CVector v = oracle::random_vector(5, rng);
      const CVector yv = y * v;
      for (int k = 0; k < 5; ++k) {
        const auto m = build_injection_matrices(y, k);
        const Complex s = v(k) * std::conj(yv(k));
        EXPECT_NEAR(m.phi.quadratic_form(v), s.real(), 1e-10);
        EXPECT_NEAR(m.psi.quadratic_form(v), s.imag(), 1e-10);
      }
      const PhysicalState st = recover_physical(v, net);
      double shunt = 0.0;
      for (int k = 0; k < 5; ++k) shunt += net.buses[static_cast<size_t>(k)].shunt.real() * std::norm(v(k));
      EXPECT_NEAR(st.p.sum(), st.loss.sum() + shunt, 1e-10 * (1.0 + v.squaredNorm()));
      for (Eigen::Index l = 0; l < st.loss.size(); ++l) {
        EXPECT_GE(st.loss(l), -1e-12);
        EXPECT_NEAR(st.loss(l), st.p_from(l) + st.p_to(l), 1e-12 * (1.0 + v.squaredNorm()));
        // Bounding both ends bounds the magnitude.
        const double fmax = std::max(st.p_from(l), st.p_to(l));
        EXPECT_LE(std::abs(st.p_from(l)), fmax + 1e-12 * (1.0 + v.squaredNorm()));
      }
      ++checked;
    }
  }
  EXPECT_EQ(checked, 1000);
}

TEST(OpfProperty, EntryFormulas) {
  std::mt19937_64 rng(8080);
  for (int tree = 0; tree < 30; ++tree) {
    const int n = std::uniform_int_distribution<int>(2, 12)(rng);
    const PowerNetwork net = oracle::random_network(n, rng, false);
    const CMatrix y = build_admittance(net);
    for (int k = 0; k < n; ++k) {
      const auto m = build_injection_matrices(y, k);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          if (i == j) continue;
          EXPECT_NEAR(std::abs(m.phi(i, j) - phi_entry(net, k, i, j)), 0.0, 1e-15);
          EXPECT_NEAR(std::abs(m.psi(i, j) - psi_entry(net, k, i, j)), 0.0, 1e-15);
        }
    }
    for (const auto& ln : net.lines) {
      const auto f = build_flow_matrices(net, ln.from, ln.to);
      for (int i = 0; i < n; ++i)
        for (int j = 0; j < n; ++j) {
          EXPECT_EQ(f.m_ij(i, j), m_entry(ln, ln.from, ln.to, i, j));
          EXPECT_EQ(f.m_ji(i, j), m_entry(ln, ln.to, ln.from, i, j));
          EXPECT_EQ(f.t(i, j), t_entry(ln, ln.from, ln.to, i, j));
        }
      EXPECT_TRUE(is_psd(f.t));
    }
  }
}

TEST(OpfProperty, GaugeInvariance) {
  std::mt19937_64 rng(90);
  std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
  const PowerNetwork net = with_finite_bounds(oracle::random_network(6, rng));
  const QcqpProblem p = assemble_opf(net, {ObjectiveKind::loss, {}});
  for (int t = 0; t < 50; ++t) {
    const CVector v = oracle::random_vector(6, rng);
    const CVector w = std::polar(1.0, ang(rng)) * v;
    EXPECT_NEAR(p.objective_value(w), p.objective_value(v), 1e-12 * (1.0 + v.squaredNorm()));
    for (const auto& c : p.constraints)
      EXPECT_NEAR(c.matrix.quadratic_form(w), c.matrix.quadratic_form(v), 1e-12 * (1.0 + v.squaredNorm()));
  }
}
