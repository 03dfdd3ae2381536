#include "treeqcqp/recovery.hpp"

#include <algorithm>
#include <cmath>

#include "treeqcqp/errors.hpp"
#include "treeqcqp/heuristic.hpp"

namespace treeqcqp {

std::string to_string(StageKind k) {
  switch (k) {
    case StageKind::plain: return "plain";
    case StageKind::eps: return "eps";
    case StageKind::delta: return "delta";
  }
  return "unknown";
}

std::string to_string(RecoveryOutcome o) {
  switch (o) {
    case RecoveryOutcome::exact_rank1: return "exact_rank1";
    case RecoveryOutcome::cascade_rank1: return "cascade_rank1";
    case RecoveryOutcome::handed_to_heuristic: return "handed_to_heuristic";
    case RecoveryOutcome::failed: return "failed";
  }
  return "unknown";
}

std::optional<CVector> extract_rank1(const HermitianMatrix& w, double tau_rank, int gauge, double abs_floor) {
  const Spectrum s = eig_hermitian(w);
  const double scale = std::max(std::abs(s.max()), std::abs(s.min()));
  if (s.min() < -kTauPsd * (1.0 + scale))
    throw ValidationError("extract_rank1: matrix has a negative eigenvalue beyond tolerance");
  const int r = numeric_rank(s, tau_rank, abs_floor);
  if (r == 0) return CVector::Zero(w.dim());
  if (r > 1) return std::nullopt;
  return gauge_fix(std::sqrt(s.max()) * s.eigenvectors.col(0), gauge);
}

namespace {

HermitianMatrix active_sum(const QcqpProblem& p) {
  HermitianMatrix s = HermitianMatrix::zeros(p.n);
  for (const auto& c : p.constraints)
    if (c.active()) s += c.matrix;
  return s;
}

}  // namespace

std::optional<double> choose_eps0(const QcqpProblem& p) {
  if (!p.objective_definite()) throw ContractViolation("choose_eps0: objective is not positive definite");
  const HermitianMatrix s = active_sum(p);
  const double target = 0.5 * min_eigenvalue(p.objective);
  auto ok = [&](double eps) {
    return min_eigenvalue(p.objective + eps * s) >= target - 1e-12 * (1.0 + std::abs(target));
  };
  double bad = -1.0;
  double good = -1.0;
  double g = 1.0;
  for (int k = 0; k <= 12; ++k, g *= 0.1) {
    if (ok(g)) {
      good = g;
      break;
    }
    bad = g;
  }
  if (good < 0) return std::nullopt;
  if (bad < 0) return good;
  for (int it = 0; it < 20; ++it) {
    const double mid = 0.5 * (good + bad);
    if (ok(mid)) good = mid;
    else bad = mid;
  }
  return good;
}

SdpData build_eps_perturbation(const QcqpProblem& p, double eps, double eps0) {
  if (!(eps > 0) || eps > eps0 * (1.0 + 1e-12))
    throw ContractViolation("build_eps_perturbation: eps outside (0, eps0]");
  SdpData d = build_relaxation(p);
  double bsum = 0.0;
  for (const auto& c : p.constraints)
    if (c.active()) bsum += c.upper;
  d.cost = p.objective + eps * active_sum(p);
  d.constant = -eps * bsum;
  return d;
}

double slack_sum(const QcqpProblem& p, const HermitianMatrix& w) {
  double s = 0.0;
  for (const auto& c : p.constraints)
    if (c.active()) s += c.upper - trace_product(c.matrix, w);
  return s;
}

double select_eps_for_zeta(const QcqpProblem& p, double eps0, const SdpSolution& sol_eps0, double zeta) {
  const double s = slack_sum(p, sol_eps0.w);
  return std::min(eps0 / 2.0, zeta / std::max(s, kTauAbs));
}

QcqpProblem delta_problem(const QcqpProblem& p, double delta) {
  QcqpProblem q = p;
  q.objective = p.objective + delta * HermitianMatrix::identity(p.n);
  return q;
}

bool usable(const SdpSolution& s) {
  if (s.status == SdpStatus::optimal) return true;
  if (s.status != SdpStatus::max_iters && s.status != SdpStatus::numerical_failure) return false;
  return std::max({s.residuals.primal_feas, s.residuals.dual_feas, s.residuals.gap}) <= 1e-6;
}

namespace {

class Pipeline {
 public:
  Pipeline(const QcqpProblem& p, const RecoveryOptions& opt, RecoveryReport& rep)
      : p_(p), opt_(opt), rep_(rep), floor_(rank_floor(p, opt.sdp.tol_feas)) {}

  // Solves data, records a stage; false on solver failure.
  bool stage(StageKind kind, double param, const QcqpProblem& q, const SdpData& data, Stage*& out) {
    Stage st;
    st.kind = kind;
    st.parameter = param;
    st.solution = solve_sdp(data, opt_.sdp);
    st.rank = numeric_rank(eig_hermitian(st.solution.w), opt_.tau_rank, floor_);
    st.objective_c = trace_product(p_.objective, st.solution.w);
    st.slack_sum = slack_sum(q, st.solution.w);
    rep_.stages.push_back(std::move(st));
    out = &rep_.stages.back();
    if (!usable(*out)) {
      rep_.outcome = RecoveryOutcome::failed;
      rep_.failed_stage = to_string(kind);
      return false;
    }
    return true;
  }

  bool usable(const Stage& s) const { return treeqcqp::usable(s.solution); }

  // Feasible version of a rank-1 point (polished if needed), or nothing.
  std::optional<CVector> feasible_point(CVector x) {
    if (quadratic_violations(p_, x, opt_.sdp.tol_feas).feasible) return x;
    HeuristicConfig cfg;
    cfg.max_outer_iters = 10;
    cfg.tol_feas = opt_.sdp.tol_feas;
    const CartesianParametrization cart(p_.n, opt_.gauge);
    const HeuristicResult h = restore_from_point(p_, x, rep_.lower_bound, cfg, cart);
    if (h.outcome != HeuristicOutcome::feasible) return std::nullopt;
    rep_.polished = true;
    return *h.x_tilde;
  }

  // Walks eps down from eps0 to the zeta-selected value and accepts the first
  // rank-1 stage whose point is within zeta of the lower bound.
  std::optional<CVector> eps_cascade(const QcqpProblem& q, bool& failed) {
    failed = false;
    const auto eps0 = choose_eps0(q);
    if (!eps0) return std::nullopt;
    Stage* st = nullptr;
    auto attempt = [&](double eps) -> std::optional<CVector> {
      if (!stage(StageKind::eps, eps, q, build_eps_perturbation(q, eps, *eps0), st)) {
        failed = true;
        return std::nullopt;
      }
      if (st->rank > 1) return std::nullopt;
      auto x = feasible_point(*extract_rank1(st->solution.w, opt_.tau_rank, opt_.gauge, floor_));
      if (x && p_.objective_value(*x) - rep_.lower_bound <= rep_.zeta) return x;
      return std::nullopt;
    };
    if (auto x = attempt(*eps0)) return x;
    if (failed) return std::nullopt;
    const double target = select_eps_for_zeta(q, *eps0, st->solution, rep_.zeta);
    for (double eps = *eps0 / 10.0; eps > target; eps /= 10.0) {
      if (auto x = attempt(eps)) return x;
      if (failed) return std::nullopt;
    }
    for (double eps : {target, target / 2.0}) {
      if (auto x = attempt(eps)) return x;
      if (failed) return std::nullopt;
    }
    return std::nullopt;
  }

  void finish(CVector x, RecoveryOutcome outcome) {
    const auto y = feasible_point(std::move(x));
    if (!y) {
      rep_.outcome = RecoveryOutcome::handed_to_heuristic;
      return;
    }
    rep_.x_star = *y;
    rep_.p_hat = p_.objective_value(*y);
    rep_.achieved_gap = rep_.p_hat - rep_.lower_bound;
    rep_.outcome = outcome;
  }

  void run() {
    if (!opt_.skip_condition_check) {
      rep_.condition_checked = true;
      rep_.condition_pass = check_condition1(p_).pass;
    }
    rep_.removed_constraints_excluded = p_.active_indices().size() < p_.constraints.size();

    Stage* st = nullptr;
    if (!stage(StageKind::plain, 0.0, p_, build_relaxation(p_), st)) return;
    rep_.lower_bound = st->solution.r_star;
    rep_.w_for_heuristic = st->solution.w;
    rep_.zeta = opt_.zeta ? *opt_.zeta : 1e-6 * (1.0 + std::abs(rep_.lower_bound));
    if (st->rank <= 1) {
      finish(*extract_rank1(st->solution.w, opt_.tau_rank, opt_.gauge, floor_), RecoveryOutcome::exact_rank1);
      return;
    }

    if (opt_.plain_only) {
      rep_.outcome = RecoveryOutcome::handed_to_heuristic;
      return;
    }
    bool failed = false;
    if (p_.objective_definite()) {
      auto x = eps_cascade(p_, failed);
      if (failed) return;
      if (x) finish(*x, RecoveryOutcome::cascade_rank1);
      else rep_.outcome = RecoveryOutcome::handed_to_heuristic;
      return;
    }

    const double delta0 = opt_.delta0_rel * (spectral_norm(p_.objective) + 1.0);
    double target = -1.0;
    for (double delta = delta0;; delta /= 10.0) {
      if (target >= 0 && delta <= target) delta = target;
      const QcqpProblem q = delta_problem(p_, delta);
      if (!stage(StageKind::delta, delta, q, build_relaxation(q), st)) return;
      if (target < 0) {
        const double gap0 = st->solution.r_star - rep_.lower_bound;
        target = std::min(delta0 / 2.0, rep_.zeta * delta0 / std::max(gap0, kTauAbs));
      }
      if (st->rank <= 1) {
        auto x = feasible_point(*extract_rank1(st->solution.w, opt_.tau_rank, opt_.gauge, floor_));
        if (x && p_.objective_value(*x) - rep_.lower_bound <= rep_.zeta) {
          finish(*x, RecoveryOutcome::cascade_rank1);
          return;
        }
      } else {
        auto x = eps_cascade(q, failed);
        if (failed) return;
        if (x) {
          finish(*x, RecoveryOutcome::cascade_rank1);
          return;
        }
      }
      if (delta <= target) break;
    }
    rep_.outcome = RecoveryOutcome::handed_to_heuristic;
  }

 private:
  const QcqpProblem& p_;
  const RecoveryOptions& opt_;
  RecoveryReport& rep_;
  double floor_;
};

}  // namespace

RecoveryReport solve_exact(const QcqpProblem& p, const RecoveryOptions& opt) {
  p.validate();
  RecoveryReport rep;
  rep.stages.reserve(8);
  Pipeline(p, opt, rep).run();
  return rep;
}

}  // namespace treeqcqp
