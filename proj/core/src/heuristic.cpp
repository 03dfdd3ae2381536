#include "treeqcqp/heuristic.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

#include "treeqcqp/errors.hpp"

namespace treeqcqp {

RVector CartesianParametrization::params_of(const CVector& x) const {
  const CVector y = gauge_fix(x, gauge_);
  RVector p(size());
  int j = 0;
  for (int k = 0; k < n_; ++k) p(j++) = y(k).real();
  for (int k = 0; k < n_; ++k)
    if (k != gauge_) p(j++) = y(k).imag();
  return p;
}

CVector CartesianParametrization::point(const RVector& p) const {
  CVector x(n_);
  int j = n_;
  for (int k = 0; k < n_; ++k) {
    const double im = k == gauge_ ? 0.0 : p(j++);
    x(k) = Complex(p(k), im);
  }
  return x;
}

CMatrix CartesianParametrization::jacobian(const RVector&) const {
  CMatrix jac = CMatrix::Zero(n_, size());
  int j = n_;
  for (int k = 0; k < n_; ++k) {
    jac(k, k) = 1.0;
    if (k != gauge_) jac(k, j++) = Complex(0.0, 1.0);
  }
  return jac;
}

RVector PolarParametrization::params_of(const CVector& x) const {
  const double phase = std::abs(x(gauge_)) > 0 ? std::arg(x(gauge_)) : 0.0;
  RVector p(size());
  int j = 0;
  for (int k = 0; k < n_; ++k)
    if (k != gauge_) p(j++) = std::abs(x(k));
  for (int k = 0; k < n_; ++k)
    if (k != gauge_) p(j++) = std::arg(x(k)) - phase;
  return p;
}

CVector PolarParametrization::point(const RVector& p) const {
  CVector x(n_);
  const int h = n_ - 1;
  int j = 0;
  for (int k = 0; k < n_; ++k) {
    if (k == gauge_) {
      x(k) = gauge_magnitude_;
    } else {
      x(k) = std::polar(p(j), p(h + j));
      ++j;
    }
  }
  return x;
}

CMatrix PolarParametrization::jacobian(const RVector& p) const {
  CMatrix jac = CMatrix::Zero(n_, size());
  const int h = n_ - 1;
  int j = 0;
  for (int k = 0; k < n_; ++k) {
    if (k == gauge_) continue;
    const Complex e = std::polar(1.0, p(h + j));
    jac(k, j) = e;
    jac(k, h + j) = Complex(0.0, p(j)) * e;
    ++j;
  }
  return jac;
}

CVector gauge_fix(const CVector& x, int gauge) {
  if (x.size() == 0) return x;
  Eigen::Index g = gauge;
  if (std::abs(x(g)) == 0.0) x.cwiseAbs().maxCoeff(&g);
  const double a = std::abs(x(g));
  if (a == 0.0) return x;
  return x * (std::conj(x(g)) / a);
}

CVector initial_point(const HermitianMatrix& w, const HermitianMatrix& c, StartMode mode, int gauge) {
  const Spectrum s = eig_hermitian(w);
  if (s.max() <= 0.0) return CVector::Zero(w.dim());
  const CVector u = s.eigenvectors.col(0);
  const double scale =
      mode == StartMode::rank1_approx ? std::sqrt(s.max()) : std::sqrt(std::max(0.0, trace_product(c, w)));
  return gauge_fix(scale * u, gauge);
}

Violations quadratic_violations(const QcqpProblem& p, const CVector& x, double tol_feas) {
  Violations v;
  v.per_constraint = RVector::Zero(static_cast<Eigen::Index>(p.constraints.size()));
  for (size_t k = 0; k < p.constraints.size(); ++k) {
    const auto& c = p.constraints[k];
    if (!c.active()) continue;
    const double s = std::max(0.0, c.matrix.quadratic_form(x) - c.upper);
    v.per_constraint(static_cast<Eigen::Index>(k)) = s;
    v.total += s * s;
    if (s > tol_feas * (1.0 + std::abs(c.upper))) v.feasible = false;
  }
  return v;
}

double linearize_violation(const QcqpProblem& p, const CVector& x_m, const CVector& x) {
  double total = 0.0;
  const CVector dx = x - x_m;
  for (const auto& c : p.constraints) {
    if (!c.active()) continue;
    const CVector cx = c.matrix.matrix() * x_m;
    const double f = x_m.dot(cx).real() + 2.0 * cx.dot(dx).real();
    const double s = std::max(0.0, f - c.upper);
    total += s * s;
  }
  return total;
}

RVector project_l1_ball(const RVector& v, double radius) {
  if (!(radius < kInf)) return v;
  if (radius <= 0.0) return RVector::Zero(v.size());
  if (v.lpNorm<1>() <= radius) return v;
  std::vector<double> u(static_cast<size_t>(v.size()));
  for (Eigen::Index i = 0; i < v.size(); ++i) u[static_cast<size_t>(i)] = std::abs(v(i));
  std::sort(u.begin(), u.end(), std::greater<>());
  double cum = 0.0, theta = 0.0;
  for (size_t j = 0; j < u.size(); ++j) {
    cum += u[j];
    const double t = (cum - radius) / static_cast<double>(j + 1);
    if (u[j] - t > 0) theta = t;
  }
  RVector out(v.size());
  for (Eigen::Index i = 0; i < v.size(); ++i) {
    const double m = std::max(0.0, std::abs(v(i)) - theta);
    out(i) = v(i) < 0 ? -m : m;
  }
  return out;
}

namespace {

struct Linearized {
  RMatrix a;  // one row per active constraint
  RVector c;  // f_k(p_m) - b_k

  double value(const RVector& d) const {
    const RVector r = (a * d + c).cwiseMax(0.0);
    return r.squaredNorm();
  }
  RVector gradient(const RVector& d) const {
    const RVector r = (a * d + c).cwiseMax(0.0);
    return 2.0 * a.transpose() * r;
  }
};

Linearized linearize(const QcqpProblem& p, const Parametrization& param, const RVector& pm) {
  const CVector x = param.point(pm);
  const CMatrix jac = param.jacobian(pm);
  const auto active = p.active_indices();
  Linearized lin;
  lin.a.resize(static_cast<Eigen::Index>(active.size()), param.size());
  lin.c.resize(static_cast<Eigen::Index>(active.size()));
  for (size_t r = 0; r < active.size(); ++r) {
    const auto& con = p.constraints[static_cast<size_t>(active[r])];
    const CVector cx = con.matrix.matrix() * x;
    lin.c(static_cast<Eigen::Index>(r)) = x.dot(cx).real() - con.upper;
    lin.a.row(static_cast<Eigen::Index>(r)) = 2.0 * (jac.adjoint() * cx).real().transpose();
  }
  return lin;
}

}  // namespace

StepResult heuristic_step(const QcqpProblem& p, const Parametrization& param, const RVector& p_m,
                          const HeuristicConfig& cfg) {
  if (!(cfg.gamma > 0)) throw ValidationError("heuristic: gamma must be positive");
  const Linearized lin = linearize(p, param, p_m);
  const int dim = param.size();
  RVector d = RVector::Zero(dim);
  double f = lin.value(d);
  StepResult out;
  out.start_value = f;
  out.trace.push_back(f);
  const double lip = 2.0 * std::max(lin.a.squaredNorm(), 1e-300);

  int it = 0;
  for (; it < cfg.max_inner_iters && f > 0.0; ++it) {
    const RVector r = lin.a * d + lin.c;
    const RVector g = lin.gradient(d);
    // Gauss-Newton on the rows whose hinge is open.
    RMatrix open_rows(lin.a.rows(), dim);
    Eigen::Index cnt = 0;
    for (Eigen::Index k = 0; k < r.size(); ++k)
      if (r(k) > 0) open_rows.row(cnt++) = lin.a.row(k);
    RMatrix h = 2.0 * open_rows.topRows(cnt).transpose() * open_rows.topRows(cnt);
    const double mu = 1e-10 * std::max(h.diagonal().maxCoeff(), 1e-300);
    h.diagonal().array() += mu;
    const RVector s = -h.ldlt().solve(g);

    auto try_dir = [&](const RVector& target) -> bool {
      const RVector dir = project_l1_ball(target, cfg.gamma) - d;
      const double slope = g.dot(dir);
      if (!(slope < 0)) return false;
      double t = 1.0;
      for (int bt = 0; bt < 60; ++bt, t *= 0.5) {
        const RVector cand = d + t * dir;
        const double fc = lin.value(cand);
        if (fc <= f + 1e-4 * t * slope) {
          d = cand;
          f = fc;
          return true;
        }
      }
      return false;
    };

    const double before = f;
    bool moved = s.allFinite() && try_dir(d + s);
    if (!moved) moved = try_dir(d - g / lip);
    out.trace.push_back(f);
    if (!moved) break;
    if (before - f <= 1e-15 * before) break;
  }
  out.inner_iterations = it;
  out.warning = it >= cfg.max_inner_iters && f > 0.0;
  out.end_value = f;
  out.params = p_m + d;
  return out;
}

CVector heuristic_step(const QcqpProblem& p, const CVector& x_m, const HeuristicConfig& cfg) {
  const CartesianParametrization param(p.n, 0);
  const RVector pm = param.params_of(x_m);
  return param.point(heuristic_step(p, param, pm, cfg).params);
}

HeuristicResult restore_from_point(const QcqpProblem& p, const CVector& x0, double r_star,
                                   const HeuristicConfig& cfg, const Parametrization& param) {
  if (cfg.max_outer_iters < 1) throw ValidationError("heuristic: max_outer_iters must be at least 1");
  HeuristicResult res;
  RVector pm = param.params_of(x0);
  CVector x = param.point(pm);
  Violations v = quadratic_violations(p, x, cfg.tol_feas);
  res.violation_trace.push_back(v.total);
  int m = 0;
  while (!v.feasible && m < cfg.max_outer_iters) {
    const StepResult st = heuristic_step(p, param, pm, cfg);
    res.inner_warning = res.inner_warning || st.warning;
    pm = st.params;
    x = param.point(pm);
    const double prev = v.total;
    v = quadratic_violations(p, x, cfg.tol_feas);
    res.violation_trace.push_back(v.total);
    ++m;
    if (!v.feasible && std::abs(prev - v.total) < 1e-10 * prev) break;
  }
  res.iterations = m;
  res.objective = p.objective_value(x);
  if (v.feasible) {
    res.outcome = HeuristicOutcome::feasible;
    res.x_tilde = x;
    if (std::abs(r_star) > kTauAbs) res.eta = res.objective / r_star - 1.0;
  }
  return res;
}

HeuristicResult restore_feasibility(const QcqpProblem& p, const HermitianMatrix& w_star, double r_star,
                                    const HeuristicConfig& cfg, const Parametrization* param) {
  const CVector x0 = initial_point(w_star, p.objective, cfg.start_mode);
  if (param) return restore_from_point(p, x0, r_star, cfg, *param);
  const CartesianParametrization cart(p.n, 0);
  return restore_from_point(p, x0, r_star, cfg, cart);
}

}  // namespace treeqcqp
