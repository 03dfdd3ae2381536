#pragma once

#include <optional>
#include <string>
#include <vector>

#include "treeqcqp/hermitian.hpp"
#include "treeqcqp/qcqp.hpp"
#include "treeqcqp/relaxation.hpp"

namespace treeqcqp {

/// Returns sqrt(rho_1) u_1 with entry gauge made real and nonnegative when
/// numeric_rank(W) <= 1, the zero vector when W has rank 0, and nothing
/// otherwise. The residual obeys ||W - x x^H||_F <= sqrt(n) tau_rank ||W||_F.
std::optional<CVector> extract_rank1(const HermitianMatrix& w, double tau_rank = kTauRank, int gauge = 0,
                                     double abs_floor = 0.0);

/// Largest eps0 with rho_min[C + eps sum_k C_k] >= rho_min[C] / 2 on
/// [0, eps0], searched on 1, 1e-1, ..., 1e-12 and refined by bisection.
/// Empty when even 1e-12 violates. Requires C positive definite.
std::optional<double> choose_eps0(const QcqpProblem& p);

/// RP with objective tr(C W) - eps sum_k (b_k - tr(C_k W)) over active rows.
SdpData build_eps_perturbation(const QcqpProblem& p, double eps, double eps0);

/// sum_k (b_k - tr(C_k W)) over active rows.
double slack_sum(const QcqpProblem& p, const HermitianMatrix& w);

/// min(eps0 / 2, zeta / max(slack sum at the eps0 optimum, tau_abs)).
double select_eps_for_zeta(const QcqpProblem& p, double eps0, const SdpSolution& sol_eps0, double zeta);

/// P with objective C + delta I.
QcqpProblem delta_problem(const QcqpProblem& p, double delta);

enum class StageKind { plain, eps, delta };
enum class RecoveryOutcome { exact_rank1, cascade_rank1, handed_to_heuristic, failed };

std::string to_string(StageKind k);
std::string to_string(RecoveryOutcome o);

struct Stage {
  StageKind kind = StageKind::plain;
  double parameter = 0.0;
  SdpSolution solution;
  int rank = 0;
  /// tr(C W) with the original objective C.
  double objective_c = 0.0;
  double slack_sum = 0.0;
};

struct RecoveryOptions {
  std::optional<double> zeta;
  double delta0_rel = 1.0;
  bool skip_condition_check = false;
  double tau_rank = kTauRank;
  int gauge = 0;
  /// Stop after the plain relaxation when it is not rank one.
  bool plain_only = false;
  SdpOptions sdp;
};

struct RecoveryReport {
  std::vector<Stage> stages;
  std::optional<CVector> x_star;
  double p_hat = 0.0;
  double lower_bound = 0.0;
  double zeta = 0.0;
  double achieved_gap = 0.0;
  RecoveryOutcome outcome = RecoveryOutcome::failed;
  bool condition_checked = false;
  bool condition_pass = false;
  /// Removed constraints were left out of the perturbation slack sums.
  bool removed_constraints_excluded = false;
  /// Rank-1 point needed a feasibility polish before it was accepted.
  bool polished = false;
  std::string failed_stage;
  /// Relaxation optimum handed to the heuristic (plain stage W).
  HermitianMatrix w_for_heuristic{1};
};

RecoveryReport solve_exact(const QcqpProblem& p, const RecoveryOptions& opt = {});

/// Solver status accepted by the pipeline: optimal, or a best iterate whose
/// residuals are all below 1e-6.
bool usable(const SdpSolution& s);

}  // namespace treeqcqp
