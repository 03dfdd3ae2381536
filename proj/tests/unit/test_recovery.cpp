#include <gtest/gtest.h>

#include <numbers>
#include <random>

#include "../support/fixtures.hpp"
#include "../support/oracles.hpp"
#include "treeqcqp/errors.hpp"
#include "treeqcqp/recovery.hpp"

using namespace treeqcqp;
using fixture::tie_problem;

namespace {

const Complex I(0.0, 1.0);

void expect_feasible(const QcqpProblem& p, const CVector& x, double tol = 1e-8) {
  for (const auto& c : p.constraints)
    if (c.active()) EXPECT_LE(c.matrix.quadratic_form(x) - c.upper, tol * (1.0 + std::abs(c.upper))) << c.label;
}

}  // namespace

TEST(ExtractRank1, Examples) {
  CMatrix w(2, 2);
  w << 1.0, I, -I, 1.0;
  const auto x = extract_rank1(HermitianMatrix(w), 1e-5, 0);
  ASSERT_TRUE(x);
  EXPECT_NEAR(std::abs((*x)(0) - 1.0), 0.0, 1e-12);
  EXPECT_NEAR(std::abs((*x)(1) + I), 0.0, 1e-12);
  EXPECT_LT((HermitianMatrix::outer(*x).matrix() - w).norm(), 1e-12);

  const auto z = extract_rank1(HermitianMatrix::zeros(3));
  ASSERT_TRUE(z);
  EXPECT_EQ(z->norm(), 0.0);

  EXPECT_FALSE(extract_rank1(HermitianMatrix::identity(2)));
  RVector d(2);
  d << 1.0, -1.0;
  EXPECT_THROW(extract_rank1(HermitianMatrix::diagonal(d)), ValidationError);
}

TEST(ExtractRank1, ResidualBound) {
  std::mt19937_64 rng(8);
  for (int t = 0; t < 50; ++t) {
    const int n = std::uniform_int_distribution<int>(1, 10)(rng);
    const CVector v = oracle::random_vector(n, rng);
    HermitianMatrix w = HermitianMatrix::outer(v);
    w += 1e-9 * v.squaredNorm() * HermitianMatrix::identity(n);
    const auto x = extract_rank1(w, 1e-5, 0);
    ASSERT_TRUE(x);
    EXPECT_GE((*x)(0).real(), 0.0);
    EXPECT_NEAR((*x)(0).imag(), 0.0, 1e-12);
    EXPECT_LE((w.matrix() - HermitianMatrix::outer(*x).matrix()).norm(),
              std::sqrt(static_cast<double>(n)) * 1e-5 * w.frobenius_norm());
  }
}

TEST(Eps0, Examples) {
  QcqpProblem p;
  p.n = 2;
  p.objective = HermitianMatrix::identity(2);
  p.constraints.push_back({HermitianMatrix::zeros(2), 1.0, ""});
  EXPECT_DOUBLE_EQ(*choose_eps0(p), 1.0);

  p.constraints[0] = {-HermitianMatrix::identity(2), -1.0, ""};
  EXPECT_NEAR(*choose_eps0(p), 0.5, 1e-6);
  EXPECT_LE(*choose_eps0(p), 0.5);

  p.objective = 2.0 * HermitianMatrix::identity(2);
  HermitianMatrix x(2);
  x.set(0, 1, 1.0);
  p.constraints[0] = {x, 1.0, ""};
  EXPECT_DOUBLE_EQ(*choose_eps0(p), 1.0);

  p.objective = HermitianMatrix::zeros(2);
  EXPECT_THROW(choose_eps0(p), ContractViolation);
}

TEST(EpsPerturbation, Contract) {
  const QcqpProblem p = tie_problem(1.0, 1.0, 0.5, 10.0);
  EXPECT_THROW(build_eps_perturbation(p, 0.0, 0.5), ContractViolation);
  EXPECT_THROW(build_eps_perturbation(p, 0.6, 0.5), ContractViolation);
  const SdpData d = build_eps_perturbation(p, 1e-3, 0.5);
  EXPECT_NEAR(d.constant, -1e-3 * (-1.0 - 1.0 + 10.0), 1e-15);
}

TEST(EpsPerturbation, ScalarOptimum) {
  QcqpProblem p;
  p.n = 1;
  p.objective = HermitianMatrix::identity(1);
  p.constraints.push_back({HermitianMatrix::identity(1), 2.0, "hi"});
  p.constraints.push_back({-HermitianMatrix::identity(1), -1.0, "lo"});
  const SdpSolution s = solve_sdp(build_eps_perturbation(p, 1e-3, 0.5));
  ASSERT_EQ(s.status, SdpStatus::optimal);
  EXPECT_NEAR(s.w(0, 0).real(), 1.0, 1e-6);
  // tr W - eps (2 - W) at W = 1.
  EXPECT_NEAR(s.r_star, 1.0 - 1e-3, 1e-7);
}

TEST(SelectEps, Formula) {
  QcqpProblem p;
  p.n = 1;
  p.objective = HermitianMatrix::identity(1);
  p.constraints.push_back({HermitianMatrix::identity(1), 10.0, ""});
  SdpSolution s;
  s.w = HermitianMatrix::zeros(1);
  EXPECT_NEAR(select_eps_for_zeta(p, 1.0, s, 1e-4), 1e-5, 1e-18);
  EXPECT_DOUBLE_EQ(select_eps_for_zeta(p, 1.0, s, 100.0), 0.5);
  s.w = 10.0 * HermitianMatrix::identity(1);
  EXPECT_DOUBLE_EQ(select_eps_for_zeta(p, 1.0, s, 1e-4), 0.5);
}

TEST(SolveExact, TwoNodeExact) {
  std::mt19937_64 rng(12);
  const QcqpProblem p = oracle::random_tree_qcqp(2, rng);
  const RecoveryReport r = solve_exact(p);
  ASSERT_EQ(r.outcome, RecoveryOutcome::exact_rank1);
  ASSERT_EQ(r.stages.size(), 1u);
  EXPECT_TRUE(r.condition_pass);
  ASSERT_TRUE(r.x_star);
  expect_feasible(p, *r.x_star);
  const oracle::GridResult g = oracle::polar_grid_minimize(p, 40);
  EXPECT_NEAR(r.p_hat, g.value, 1e-3 * std::abs(g.value));
}

TEST(SolveExact, TieGoesThroughCascade) {
  const QcqpProblem p = tie_problem(1.0, 1.0, 0.5, 10.0);
  ASSERT_TRUE(check_condition1(p).pass);
  const RecoveryReport r = solve_exact(p);
  ASSERT_GE(r.stages.size(), 2u);
  EXPECT_EQ(r.stages[0].rank, 2);
  ASSERT_EQ(r.outcome, RecoveryOutcome::cascade_rank1);
  ASSERT_TRUE(r.x_star);
  expect_feasible(p, *r.x_star);
  // Both phase choices give 2; the eps term selects x2 = -x1.
  EXPECT_NEAR(r.p_hat, 2.0, 1e-6);
  EXPECT_LE(r.achieved_gap, r.zeta);
  EXPECT_NEAR(std::abs((*r.x_star)(0) + (*r.x_star)(1)), 0.0, 1e-3);
}

TEST(SolveExact, ZeroObjectiveUsesDelta) {
  QcqpProblem p = tie_problem(1.0, 0.5, 0.5, 10.0);
  p.objective = HermitianMatrix::zeros(2);
  const RecoveryReport r = solve_exact(p);
  ASSERT_TRUE(r.x_star) << to_string(r.outcome);
  EXPECT_NEAR(r.lower_bound, 0.0, 1e-7);
  EXPECT_NEAR(r.p_hat, 0.0, 1e-12);
  expect_feasible(p, *r.x_star);
  bool saw_delta = false;
  for (const auto& s : r.stages) saw_delta = saw_delta || s.kind == StageKind::delta;
  EXPECT_TRUE(saw_delta);
}

TEST(SolveExact, RemovedConstraintsFlagged) {
  QcqpProblem p = tie_problem(1.0, 1.0, 0.5, 10.0);
  p.constraints.push_back({HermitianMatrix::identity(2), kInf, "removed"});
  const RecoveryReport r = solve_exact(p);
  EXPECT_TRUE(r.removed_constraints_excluded);
  EXPECT_EQ(r.outcome, RecoveryOutcome::cascade_rank1);
}

TEST(RecoveryProperty, EpsStageInvariants) {
  std::mt19937_64 rng(77);
  std::uniform_real_distribution<double> u01(0.0, 1.0);
  std::uniform_real_distribution<double> ang(-std::numbers::pi, std::numbers::pi);
  int eps_stages = 0;
  for (int t = 0; t < 20; ++t) {
    const QcqpProblem p = tie_problem(0.5 + u01(rng), 0.5 + u01(rng), std::polar(0.2 + u01(rng), ang(rng)),
                                      5.0 + 10.0 * u01(rng));
    const RecoveryReport r = solve_exact(p);
    const double rstar = r.lower_bound;
    const double tol = 1e-8 * (1.0 + std::abs(rstar));
    const Stage* first_eps = nullptr;
    for (const auto& s : r.stages) {
      if (s.kind != StageKind::eps) continue;
      ++eps_stages;
      EXPECT_LE(s.solution.r_star, rstar + tol) << "instance " << t;
      EXPECT_LE(rstar, s.objective_c + tol) << "instance " << t;
      if (!first_eps) first_eps = &s;
      else EXPECT_LE(s.slack_sum, first_eps->slack_sum + 1e-6 * (1.0 + std::abs(first_eps->slack_sum)));
    }
    if (r.x_star) {
      expect_feasible(p, *r.x_star);
      // Gauge invariance of objective and constraint values.
      const CVector y = std::polar(1.0, ang(rng)) * *r.x_star;
      EXPECT_NEAR(p.objective_value(y), r.p_hat, 1e-12 * (1.0 + r.p_hat));
      for (const auto& c : p.constraints)
        EXPECT_NEAR(c.matrix.quadratic_form(y), c.matrix.quadratic_form(*r.x_star), 1e-12);
    }
  }
  EXPECT_GT(eps_stages, 0);
}

TEST(RecoveryProperty, DeltaMonotone) {
  std::mt19937_64 rng(19);
  for (int t = 0; t < 6; ++t) {
    QcqpProblem p = oracle::random_tree_qcqp(2 + t % 2, rng);
    p.objective = oracle::random_psd(p.n, 1, rng);
    double prev = -kInf;
    for (double delta : {0.0, 1e-3, 1e-2, 0.1, 0.5, 1.0, 2.0}) {
      const SdpSolution s = solve_sdp(build_relaxation(delta_problem(p, delta)));
      ASSERT_EQ(s.status, SdpStatus::optimal);
      EXPECT_GE(s.r_star, prev - 1e-7 * (1.0 + std::abs(prev)));
      prev = s.r_star;
    }
  }
}
