#include "treeqcqp/relaxation.hpp"

#include <algorithm>
#include <cmath>
#include <map>

#include "treeqcqp/errors.hpp"

namespace treeqcqp {
namespace {

SparseSym embed_sparse(const HermitianMatrix& h) {
  const int n = static_cast<int>(h.dim());
  SparseSym s;
  s.dim = 2 * n;
  for (int j = 0; j < n; ++j) {
    for (int i = 0; i <= j; ++i) {
      const Complex v = h(i, j) * 0.5;
      if (v.real() != 0.0) {
        s.upper.push_back({i, j, v.real()});
        s.upper.push_back({i + n, j + n, v.real()});
      }
      // Block (1,2) is -Im H; its (i, j + n) entry is -Im h_ij.
      if (i != j && v.imag() != 0.0) {
        s.upper.push_back({i, j + n, -v.imag()});
        s.upper.push_back({j, i + n, v.imag()});
      }
    }
  }
  return s;
}

using MatrixKey = std::vector<double>;

MatrixKey key_of(const HermitianMatrix& h, double sign) {
  MatrixKey k;
  const auto n = h.dim();
  k.reserve(static_cast<size_t>(n * (n + 1)));
  for (Eigen::Index j = 0; j < n; ++j)
    for (Eigen::Index i = 0; i <= j; ++i) {
      k.push_back(sign * h(i, j).real());
      k.push_back(sign * h(i, j).imag());
    }
  return k;
}

}  // namespace

SdpData build_relaxation(const QcqpProblem& p) {
  p.validate();
  SdpData d;
  d.n = p.n;
  d.cost = p.objective;
  d.source_constraints = static_cast<int>(p.constraints.size());

  // Pair each active row with an opposite row carrying the opposite bound.
  std::map<MatrixKey, std::vector<int>> by_matrix;
  const auto active = p.active_indices();
  for (int k : active) by_matrix[key_of(p.constraints[static_cast<size_t>(k)].matrix, 1.0)].push_back(k);
  std::vector<int> partner(p.constraints.size(), -1);
  for (int k : active) {
    if (partner[static_cast<size_t>(k)] >= 0) continue;
    const auto& ck = p.constraints[static_cast<size_t>(k)];
    auto it = by_matrix.find(key_of(ck.matrix, -1.0));
    if (it == by_matrix.end()) continue;
    for (int j : it->second) {
      if (j == k || partner[static_cast<size_t>(j)] >= 0) continue;
      const double bj = p.constraints[static_cast<size_t>(j)].upper;
      if (std::abs(ck.upper + bj) <= 1e-14 * (1.0 + std::abs(ck.upper))) {
        partner[static_cast<size_t>(k)] = j;
        partner[static_cast<size_t>(j)] = k;
        break;
      }
    }
  }
  for (int k : active) {
    const int j = partner[static_cast<size_t>(k)];
    if (j >= 0 && j < k) continue;
    const auto& ck = p.constraints[static_cast<size_t>(k)];
    SdpRow row{ck.matrix, ck.upper, j >= 0, k, j};
    d.rows.push_back(std::move(row));
  }
  return d;
}

ConicProblem embed_sdp(const SdpData& data) {
  ConicProblem cp;
  cp.dim = 2 * data.n;
  cp.cost = 0.5 * real_embedding(data.cost);
  const int m = static_cast<int>(data.rows.size());
  cp.rhs.resize(m);
  int slack = 0;
  for (int i = 0; i < m; ++i) {
    const auto& r = data.rows[static_cast<size_t>(i)];
    cp.rows.push_back(embed_sparse(r.matrix));
    cp.rhs(i) = r.bound;
    if (!r.equality) cp.linear.push_back({i, slack++, 1.0});
  }
  cp.linear_cost = RVector::Zero(slack);
  return cp;
}

SdpSolution solve_sdp(const SdpData& data, const SdpOptions& opt) {
  const ConicProblem cp = embed_sdp(data);
  ConicOptions co;
  co.tol_gap = opt.tol_gap;
  co.tol_feas = opt.tol_feas;
  co.max_iters = opt.max_iters;
  co.trace = opt.trace;
  const ConicSolution cs = solve_conic(cp, co);

  SdpSolution sol;
  sol.status = cs.status;
  sol.iterations = cs.iterations;
  sol.w = from_real_embedding(cs.x);
  sol.lambda = RVector::Zero(data.source_constraints);
  for (size_t i = 0; i < data.rows.size(); ++i) {
    const auto& r = data.rows[i];
    const double y = cs.y(static_cast<Eigen::Index>(i));
    if (r.equality) {
      sol.lambda(r.index) = std::max(0.0, -y);
      sol.lambda(r.partner) = std::max(0.0, y);
    } else {
      sol.lambda(r.index) = std::max(0.0, -y);
    }
  }

  sol.r_star = trace_product(data.cost, sol.w) + data.constant;
  double d = data.constant;
  HermitianMatrix a = data.cost;
  double pf = 0.0;
  for (size_t i = 0; i < data.rows.size(); ++i) {
    const auto& r = data.rows[i];
    const double y = -cs.y(static_cast<Eigen::Index>(i));  // multiplier on tr(M W) <= b
    const double lam = r.equality ? y : std::max(0.0, y);
    d -= lam * r.bound;
    a += lam * r.matrix;
    const double val = trace_product(r.matrix, sol.w);
    const double viol = r.equality ? std::abs(val - r.bound) : std::max(0.0, val - r.bound);
    pf = std::max(pf, viol / (std::max(1.0, r.matrix.frobenius_norm()) + std::abs(r.bound)));
  }
  sol.d_star = d;
  const Spectrum sa = eig_hermitian(a);
  const double anorm = std::max(std::abs(sa.max()), std::abs(sa.min()));
  sol.residuals.primal_feas = pf;
  sol.residuals.dual_feas = std::max(0.0, -sa.min()) / (1.0 + anorm);
  sol.residuals.gap = std::abs(sol.r_star - sol.d_star) / (1.0 + std::abs(sol.r_star));
  return sol;
}

HermitianMatrix dual_matrix(const QcqpProblem& p, const RVector& lambda) {
  if (lambda.size() != static_cast<Eigen::Index>(p.constraints.size()))
    throw ValidationError("dual_matrix: multiplier length does not match constraint count");
  HermitianMatrix a = p.objective;
  for (size_t k = 0; k < p.constraints.size(); ++k) {
    const double l = lambda(static_cast<Eigen::Index>(k));
    if (l < 0) throw ValidationError("dual_matrix: negative multiplier");
    if (l != 0.0 && p.constraints[k].active()) a += l * p.constraints[k].matrix;
  }
  return a;
}

DualCertificate dual_certificate(const QcqpProblem& p, const RVector& lambda) {
  DualCertificate c;
  c.a = dual_matrix(p, lambda);
  const Spectrum s = eig_hermitian(c.a);
  c.psd_ok = is_psd(s);
  c.graph = matrix_graph(c.a);
  c.connected = c.graph.is_connected();
  c.rank_at_least_n_minus_1 = numeric_rank(s) >= p.n - 1;
  return c;
}

double rank_floor(const QcqpProblem& p, double tol_feas) {
  double scale = 0.0;
  bool any = false;
  for (const auto& c : p.constraints) {
    if (!c.active()) continue;
    const double nm = c.matrix.frobenius_norm();
    if (nm <= kTauAbs) continue;
    scale = std::max(scale, std::abs(c.upper) / nm);
    any = true;
  }
  return tol_feas * (any ? scale : 1.0);
}

KktReport kkt_report(const QcqpProblem& p, const SdpSolution& sol) {
  KktReport r;
  const HermitianMatrix a = dual_matrix(p, sol.lambda);
  r.comp_slack = std::abs(trace_product(a, sol.w));
  r.comp_slack_violated = r.comp_slack > 1e-6 * (1.0 + a.frobenius_norm() * sol.w.frobenius_norm());
  r.dual_graph_connected = matrix_graph(a).is_connected();
  r.rank_w = numeric_rank(eig_hermitian(sol.w), kTauRank, rank_floor(p));
  r.a_min_eig = min_eigenvalue(a);
  return r;
}

ProbeResult strict_feasibility_probe(const QcqpProblem& p, double tau_box, const SdpOptions& opt) {
  p.validate();
  ProbeResult out;
  const auto active = p.active_indices();
  if (active.empty()) {
    out.slack = kInf;
    out.witness = HermitianMatrix::zeros(p.n);
    out.status = SdpStatus::optimal;
    return out;
  }
  double bmin = kInf;
  for (int k : active) bmin = std::min(bmin, p.constraints[static_cast<size_t>(k)].upper);
  // s = sigma + s_lo with sigma >= 0; W = 0 already reaches s = min b_k.
  const double s_lo = bmin - 1.0;

  SdpData d;
  d.n = p.n;
  d.cost = HermitianMatrix::zeros(p.n);
  for (int k : active) {
    const auto& c = p.constraints[static_cast<size_t>(k)];
    d.rows.push_back({c.matrix, c.upper - s_lo, false, k, -1});
  }
  d.rows.push_back({HermitianMatrix::identity(p.n), tau_box, false, -1, -1});
  ConicProblem cp = embed_sdp(d);
  const int sigma = cp.linear_count();
  cp.linear_cost.conservativeResize(sigma + 1);
  cp.linear_cost(sigma) = -1.0;
  for (int i = 0; i + 1 < cp.row_count(); ++i) cp.linear.push_back({i, sigma, 1.0});

  ConicOptions co;
  co.tol_gap = opt.tol_gap;
  co.tol_feas = opt.tol_feas;
  co.max_iters = opt.max_iters;
  co.trace = opt.trace;
  const ConicSolution cs = solve_conic(cp, co);
  out.status = cs.status;
  out.witness = from_real_embedding(cs.x);
  out.slack = s_lo + cs.u(sigma);
  return out;
}

}  // namespace treeqcqp
