#pragma once

#include <functional>
#include <vector>

#include "treeqcqp/conic.hpp"
#include "treeqcqp/graph.hpp"
#include "treeqcqp/hermitian.hpp"
#include "treeqcqp/qcqp.hpp"

namespace treeqcqp {

/// One relaxation row tr(M W) <= bound, or == bound when equality is set.
/// An equality row stands for a pair of opposite inequalities of P: index
/// carries the upper side, partner the lower side.
struct SdpRow {
  HermitianMatrix matrix;
  double bound = 0.0;
  bool equality = false;
  int index = -1;
  int partner = -1;
};

/// Hermitian SDP: minimize tr(cost W) + constant over W psd and the rows.
struct SdpData {
  int n = 1;
  HermitianMatrix cost{1};
  double constant = 0.0;
  std::vector<SdpRow> rows;
  /// Length of the multiplier vector reported back (constraints of P).
  int source_constraints = 0;
};

struct SdpOptions {
  double tol_gap = 1e-8;
  double tol_feas = 1e-8;
  int max_iters = 200;
  std::function<void(const ConicIterate&)> trace;
};

struct SdpResiduals {
  /// max violation / (max(1, norm of the row matrix) + abs(bound))
  double primal_feas = 0.0;
  double dual_feas = 0.0;
  double gap = 0.0;
};

struct SdpSolution {
  HermitianMatrix w{1};
  /// Nonnegative multipliers indexed like the constraints of P; removed
  /// constraints carry 0.
  RVector lambda;
  /// Objective of the solved data at W (includes the constant term).
  double r_star = 0.0;
  double d_star = 0.0;
  SdpStatus status = SdpStatus::numerical_failure;
  SdpResiduals residuals;
  int iterations = 0;
};

/// RP: cost C, one row per active constraint. Opposite rows with opposite
/// bounds (x^H M x == b) are merged into a single equality row.
SdpData build_relaxation(const QcqpProblem& p);

SdpSolution solve_sdp(const SdpData& data, const SdpOptions& opt = {});

/// A(lambda) = C + sum lambda_k C_k.
HermitianMatrix dual_matrix(const QcqpProblem& p, const RVector& lambda);

struct DualCertificate {
  HermitianMatrix a{1};
  bool psd_ok = false;
  ProblemGraph graph;
  bool connected = false;
  bool rank_at_least_n_minus_1 = false;
};

DualCertificate dual_certificate(const QcqpProblem& p, const RVector& lambda);

struct KktReport {
  double comp_slack = 0.0;
  bool comp_slack_violated = false;
  bool dual_graph_connected = false;
  int rank_w = 0;
  double a_min_eig = 0.0;
};

/// Eigenvalues of a solver W below this are numerical noise: tol_feas times
/// the largest |b_k| / ||C_k||_F over active rows (1 when there are none).
double rank_floor(const QcqpProblem& p, double tol_feas = 1e-8);

KktReport kkt_report(const QcqpProblem& p, const SdpSolution& sol);

struct ProbeResult {
  double slack = 0.0;
  HermitianMatrix witness{1};
  SdpStatus status = SdpStatus::numerical_failure;
};

/// max s  s.t. tr(C_k W) <= b_k - s, tr(W) <= tau_box, W psd.
ProbeResult strict_feasibility_probe(const QcqpProblem& p, double tau_box = 1e4,
                                     const SdpOptions& opt = {});

/// Embeds the data into the real conic form used by solve_conic: each
/// inequality row gets one nonnegative slack variable.
ConicProblem embed_sdp(const SdpData& data);

}  // namespace treeqcqp
