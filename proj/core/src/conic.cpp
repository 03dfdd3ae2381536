#include "treeqcqp/conic.hpp"

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>

#include "treeqcqp/errors.hpp"

namespace treeqcqp {

std::string to_string(SdpStatus s) {
  switch (s) {
    case SdpStatus::optimal: return "optimal";
    case SdpStatus::infeasible: return "infeasible";
    case SdpStatus::unbounded: return "unbounded";
    case SdpStatus::max_iters: return "max_iters";
    case SdpStatus::numerical_failure: return "numerical_failure";
  }
  return "unknown";
}

void SparseSym::add(int r, int c, double v) {
  if (v == 0.0) return;
  if (r > c) std::swap(r, c);
  for (auto& t : upper) {
    if (t.row == r && t.col == c) {
      t.value += v;
      return;
    }
  }
  upper.push_back({r, c, v});
}

double SparseSym::dot(const RMatrix& x) const {
  double s = 0.0;
  for (const auto& t : upper) s += (t.row == t.col ? 1.0 : 2.0) * t.value * x(t.row, t.col);
  return s;
}

void SparseSym::accumulate(RMatrix& out, double scale) const {
  for (const auto& t : upper) {
    out(t.row, t.col) += scale * t.value;
    if (t.row != t.col) out(t.col, t.row) += scale * t.value;
  }
}

double SparseSym::frobenius_norm() const {
  double s = 0.0;
  for (const auto& t : upper) s += (t.row == t.col ? 1.0 : 2.0) * t.value * t.value;
  return std::sqrt(s);
}

RMatrix SparseSym::dense() const {
  RMatrix m = RMatrix::Zero(dim, dim);
  accumulate(m, 1.0);
  return m;
}

namespace {

constexpr double kInfD = std::numeric_limits<double>::infinity();

struct Full {
  std::vector<int> r;
  std::vector<int> c;
  std::vector<double> v;
};

Full full_entries(const SparseSym& s) {
  Full f;
  for (const auto& t : s.upper) {
    f.r.push_back(t.row);
    f.c.push_back(t.col);
    f.v.push_back(t.value);
    if (t.row != t.col) {
      f.r.push_back(t.col);
      f.c.push_back(t.row);
      f.v.push_back(t.value);
    }
  }
  return f;
}

// Rows whose matrices agree up to sign share one Schur block.
struct UniqueRows {
  std::vector<SparseSym> mats;
  std::vector<Full> full;
  std::vector<int> id;       // per row, -1 for pure linear rows
  std::vector<double> sign;  // per row
};

UniqueRows dedupe(const std::vector<SparseSym>& rows) {
  UniqueRows u;
  std::map<std::vector<std::tuple<int, int, double>>, int> seen;
  for (const auto& row : rows) {
    std::vector<std::tuple<int, int, double>> key;
    for (const auto& t : row.upper)
      if (t.value != 0.0) key.emplace_back(t.row, t.col, t.value);
    std::sort(key.begin(), key.end());
    if (key.empty()) {
      u.id.push_back(-1);
      u.sign.push_back(0.0);
      continue;
    }
    double sg = std::get<2>(key.front()) < 0 ? -1.0 : 1.0;
    for (auto& k : key) std::get<2>(k) *= sg;
    auto it = seen.find(key);
    if (it == seen.end()) {
      const int idx = static_cast<int>(u.mats.size());
      SparseSym s;
      s.dim = row.dim;
      for (const auto& [r, c, v] : key) s.upper.push_back({r, c, v});
      u.full.push_back(full_entries(s));
      u.mats.push_back(std::move(s));
      it = seen.emplace(std::move(key), idx).first;
    }
    u.id.push_back(it->second);
    u.sign.push_back(sg);
  }
  return u;
}

double max_step(const RVector& v, const RMatrix& d) {
  const int n = static_cast<int>(v.size());
  if (n == 0) return kInfD;
  RVector s = v.cwiseSqrt().cwiseInverse();
  RMatrix m = s.asDiagonal() * d * s.asDiagonal();
  m = 0.5 * (m + m.transpose());
  Eigen::SelfAdjointEigenSolver<RMatrix> es(m, Eigen::EigenvaluesOnly);
  const double lo = es.eigenvalues()(0);
  return lo < 0 ? -1.0 / lo : kInfD;
}

double max_step_linear(const RVector& u, const RVector& du) {
  double a = kInfD;
  for (Eigen::Index i = 0; i < u.size(); ++i)
    if (du(i) < 0) a = std::min(a, -u(i) / du(i));
  return a;
}

class Solver {
 public:
  Solver(const ConicProblem& p, const ConicOptions& opt) : p_(p), opt_(opt) {}

  ConicSolution run();

 private:
  void scale();
  void residuals();
  bool scaling();
  void build_schur();
  bool factor();
  void direction(const RMatrix& rt, const RVector& rcl, RVector& dy, RMatrix& dxt, RMatrix& dzt,
                 RVector& du, RVector& dz);
  RVector apply_a(const RMatrix& x, const RVector& u) const;
  RMatrix apply_at_matrix(const RVector& y) const;
  RVector apply_at_linear(const RVector& y) const;
  void metrics(ConicSolution& s) const;

  const ConicProblem& p_;
  ConicOptions opt_;

  int n_ = 0;
  int m_ = 0;
  int l_ = 0;
  UniqueRows uniq_;
  RVector kappa_;  // per-row coefficient on its unique matrix
  RVector rho_;
  RMatrix a_lin_;  // m x l, scaled
  RVector b_;
  RMatrix c_;
  RVector cl_;
  double beta_ = 1.0;
  double gamma_ = 1.0;
  std::vector<bool> dense_;

  RMatrix x_, z_;
  RVector y_, u_, zl_;
  RVector rp_;
  RMatrix rd_;
  RVector rdl_;
  double mu_ = 0.0;

  RMatrix g_, w_;
  RVector v_;
  RMatrix schur_;
  Eigen::LLT<RMatrix> llt_;
  Eigen::LDLT<RMatrix> ldlt_;
  bool use_ldlt_ = false;
};

void Solver::scale() {
  n_ = p_.dim;
  m_ = p_.row_count();
  l_ = p_.linear_count();
  if (p_.cost.rows() != n_ || p_.cost.cols() != n_) throw ValidationError("conic: cost dimension");
  if (p_.rhs.size() != m_) throw ValidationError("conic: rhs dimension");

  uniq_ = dedupe(p_.rows);
  RMatrix alin = RMatrix::Zero(m_, l_);
  for (const auto& e : p_.linear) {
    if (e.row < 0 || e.row >= m_ || e.var < 0 || e.var >= l_)
      throw ValidationError("conic: linear entry out of range");
    alin(e.row, e.var) += e.value;
  }
  rho_.resize(m_);
  kappa_.resize(m_);
  for (int i = 0; i < m_; ++i) {
    const double fm = p_.rows[static_cast<size_t>(i)].frobenius_norm();
    double r = std::sqrt(fm * fm + alin.row(i).squaredNorm());
    if (r == 0.0) r = 1.0;
    rho_(i) = r;
    kappa_(i) = uniq_.id[static_cast<size_t>(i)] >= 0 ? uniq_.sign[static_cast<size_t>(i)] / r : 0.0;
    alin.row(i) /= r;
  }
  a_lin_ = alin;
  b_ = p_.rhs.cwiseQuotient(rho_);
  beta_ = std::max(1.0, m_ > 0 ? b_.cwiseAbs().maxCoeff() : 0.0);
  b_ /= beta_;
  const double cn = std::sqrt(p_.cost.squaredNorm() + p_.linear_cost.squaredNorm());
  gamma_ = std::max(1.0, cn);
  c_ = p_.cost / gamma_;
  cl_ = p_.linear_cost / gamma_;

  dense_.assign(uniq_.mats.size(), false);
  for (size_t k = 0; k < uniq_.mats.size(); ++k)
    dense_[k] = uniq_.full[k].v.size() > static_cast<size_t>(4 * n_);
}

RVector Solver::apply_a(const RMatrix& x, const RVector& u) const {
  RVector out = RVector::Zero(m_);
  RVector base(uniq_.mats.size());
  for (size_t k = 0; k < uniq_.mats.size(); ++k) base(static_cast<Eigen::Index>(k)) = uniq_.mats[k].dot(x);
  for (int i = 0; i < m_; ++i) {
    const int id = uniq_.id[static_cast<size_t>(i)];
    if (id >= 0) out(i) = kappa_(i) * base(id);
  }
  if (l_ > 0) out += a_lin_ * u;
  return out;
}

RMatrix Solver::apply_at_matrix(const RVector& y) const {
  RVector coef = RVector::Zero(static_cast<Eigen::Index>(uniq_.mats.size()));
  for (int i = 0; i < m_; ++i) {
    const int id = uniq_.id[static_cast<size_t>(i)];
    if (id >= 0) coef(id) += kappa_(i) * y(i);
  }
  RMatrix out = RMatrix::Zero(n_, n_);
  for (size_t k = 0; k < uniq_.mats.size(); ++k)
    if (coef(static_cast<Eigen::Index>(k)) != 0.0)
      uniq_.mats[k].accumulate(out, coef(static_cast<Eigen::Index>(k)));
  return out;
}

RVector Solver::apply_at_linear(const RVector& y) const {
  if (l_ == 0) return RVector();
  return a_lin_.transpose() * y;
}

void Solver::residuals() {
  rp_ = b_ - apply_a(x_, u_);
  rd_ = c_ - apply_at_matrix(y_) - z_;
  if (l_ > 0) rdl_ = cl_ - apply_at_linear(y_) - zl_;
  else rdl_ = RVector();
  double comp = (x_.cwiseProduct(z_)).sum();
  if (l_ > 0) comp += u_.dot(zl_);
  mu_ = comp / static_cast<double>(n_ + l_);
}

bool Solver::scaling() {
  // X = L L^T, S = L^T Z L = Q diag(s) Q^T, G = L Q diag(s^-1/4).
  Eigen::LLT<RMatrix> lx(x_);
  if (lx.info() != Eigen::Success) return false;
  const RMatrix l = lx.matrixL();
  RMatrix s = l.transpose() * z_ * l;
  s = 0.5 * (s + s.transpose());
  Eigen::SelfAdjointEigenSolver<RMatrix> es(s);
  if (es.info() != Eigen::Success) return false;
  const RVector& sv = es.eigenvalues();
  if (!(sv.minCoeff() > 0.0)) return false;
  g_ = l * es.eigenvectors() * sv.array().pow(-0.25).matrix().asDiagonal();
  w_ = g_ * g_.transpose();
  v_ = sv.cwiseSqrt();
  return true;
}

void Solver::build_schur() {
  const size_t k = uniq_.mats.size();
  RMatrix mu = RMatrix::Zero(static_cast<Eigen::Index>(k), static_cast<Eigen::Index>(k));
  std::vector<RMatrix> dense_prod(k);
  for (size_t j = 0; j < k; ++j) {
    if (!dense_[j]) continue;
    const RMatrix aj = uniq_.mats[j].dense();
    dense_prod[j] = w_ * aj * w_;
  }
  for (size_t j = 0; j < k; ++j) {
    const Full& fj = uniq_.full[j];
    for (size_t i = 0; i <= j; ++i) {
      double s = 0.0;
      if (dense_[j]) {
        s = uniq_.mats[i].dot(dense_prod[j]);
      } else if (dense_[i]) {
        s = uniq_.mats[j].dot(dense_prod[i]);
      } else {
        const Full& fi = uniq_.full[i];
        for (size_t a = 0; a < fi.v.size(); ++a) {
          const int pp = fi.r[a];
          const int qq = fi.c[a];
          double inner = 0.0;
          for (size_t b = 0; b < fj.v.size(); ++b) inner += fj.v[b] * w_(pp, fj.r[b]) * w_(fj.c[b], qq);
          s += fi.v[a] * inner;
        }
      }
      mu(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = s;
      mu(static_cast<Eigen::Index>(j), static_cast<Eigen::Index>(i)) = s;
    }
  }
  schur_.resize(m_, m_);
  for (int j = 0; j < m_; ++j) {
    const int idj = uniq_.id[static_cast<size_t>(j)];
    for (int i = 0; i <= j; ++i) {
      const int idi = uniq_.id[static_cast<size_t>(i)];
      double s = (idi >= 0 && idj >= 0) ? kappa_(i) * kappa_(j) * mu(idi, idj) : 0.0;
      schur_(i, j) = s;
      schur_(j, i) = s;
    }
  }
  if (l_ > 0) {
    const RVector d = u_.cwiseQuotient(zl_);
    schur_ += a_lin_ * d.asDiagonal() * a_lin_.transpose();
  }
}

bool Solver::factor() {
  use_ldlt_ = false;
  llt_.compute(schur_);
  if (llt_.info() == Eigen::Success) return true;
  const double reg = 1e-14 * std::max(1.0, schur_.diagonal().cwiseAbs().maxCoeff());
  RMatrix m = schur_;
  m.diagonal().array() += reg;
  llt_.compute(m);
  if (llt_.info() == Eigen::Success) return true;
  ldlt_.compute(m);
  use_ldlt_ = true;
  return ldlt_.info() == Eigen::Success;
}

void Solver::direction(const RMatrix& rt, const RVector& rcl, RVector& dy, RMatrix& dxt,
                       RMatrix& dzt, RVector& du, RVector& dz) {
  const RMatrix rc = g_ * rt * g_.transpose() - w_ * rd_ * w_;
  RVector rhs = rp_ - apply_a(rc, RVector::Zero(l_));
  RVector d;
  if (l_ > 0) {
    d = u_.cwiseQuotient(zl_);
    rhs -= a_lin_ * (rcl - d.cwiseProduct(rdl_));
  }
  auto solve = [&](const RVector& r) { return use_ldlt_ ? RVector(ldlt_.solve(r)) : RVector(llt_.solve(r)); };
  dy = solve(rhs);
  for (int k = 0; k < 2; ++k) dy += solve(rhs - schur_ * dy);
  const RMatrix dZ = rd_ - apply_at_matrix(dy);
  dzt = g_.transpose() * dZ * g_;
  dzt = 0.5 * (dzt + dzt.transpose());
  dxt = rt - dzt;
  if (l_ > 0) {
    dz = rdl_ - apply_at_linear(dy);
    du = rcl - d.cwiseProduct(dz);
  } else {
    dz = RVector();
    du = RVector();
  }
}

void Solver::metrics(ConicSolution& s) const {
  // Rows normalized to unit norm, right-hand side in original units.
  double pinf = 0.0;
  for (int i = 0; i < m_; ++i) {
    const double r = std::abs(rp_(i)) * beta_;
    const double bi = std::abs(p_.rhs(i)) / rho_(i);
    pinf = std::max(pinf, r / (1.0 + bi));
  }
  double dres = rd_.norm();
  if (l_ > 0) dres = std::sqrt(dres * dres + rdl_.squaredNorm());
  const double cn = std::sqrt(p_.cost.squaredNorm() + p_.linear_cost.squaredNorm());
  const double dinf = dres * gamma_ / (1.0 + cn);
  double pobj = (c_.cwiseProduct(x_)).sum();
  if (l_ > 0) pobj += cl_.dot(u_);
  pobj *= gamma_ * beta_;
  const double dobj = b_.dot(y_) * gamma_ * beta_;
  s.primal_infeas = pinf;
  s.dual_infeas = dinf;
  s.primal_obj = pobj;
  s.dual_obj = dobj;
  s.gap = std::abs(pobj - dobj) / (1.0 + std::abs(pobj));
}

ConicSolution Solver::run() {
  scale();
  const double start = std::max(10.0, std::sqrt(static_cast<double>(n_)));
  x_ = start * RMatrix::Identity(n_, n_);
  z_ = start * RMatrix::Identity(n_, n_);
  y_ = RVector::Zero(m_);
  u_ = RVector::Constant(l_, start);
  zl_ = RVector::Constant(l_, start);

  ConicSolution best;
  double best_merit = kInfD;
  auto capture = [&](ConicSolution& s) {
    s.x = beta_ * x_;
    s.z = gamma_ * z_;
    s.y = RVector(m_);
    for (int i = 0; i < m_; ++i) s.y(i) = y_(i) * gamma_ / rho_(i);
    s.u = beta_ * u_;
    s.zu = gamma_ * zl_;
  };

  // After the tolerances are met, a few more steps tighten the answer.
  ConicSolution done;
  double done_merit = kInfD;
  int extra = 0;
  auto finish_done = [&]() {
    done.status = SdpStatus::optimal;
    return done;
  };

  int stalls = 0;
  double last_ap = 0.0, last_ad = 0.0;
  for (int it = 0;; ++it) {
    residuals();
    ConicSolution cur;
    metrics(cur);
    cur.iterations = it;
    if (opt_.trace)
      opt_.trace({it, cur.primal_obj, cur.dual_obj, cur.primal_infeas, cur.dual_infeas, cur.gap, mu_,
                  last_ap, last_ad});
    const double merit = std::max({cur.primal_infeas, cur.dual_infeas, cur.gap});
    if (!std::isfinite(merit) || !std::isfinite(cur.primal_obj) || !std::isfinite(cur.dual_obj)) break;
    if (merit < best_merit) {
      best_merit = merit;
      best = cur;
      capture(best);
    }
    if (cur.primal_infeas <= opt_.tol_feas && cur.dual_infeas <= opt_.tol_feas && cur.gap <= opt_.tol_gap) {
      if (merit < done_merit) {
        done_merit = merit;
        done = cur;
        capture(done);
      }
    }
    if (done_merit < kInfD) {
      if (extra++ >= 3 || merit <= 1e-2 * std::min(opt_.tol_feas, opt_.tol_gap) || it >= opt_.max_iters)
        return finish_done();
    }
    // Divergence of one side signals an empty feasible set on the other.
    const double dobj_s = b_.dot(y_);
    double pobj_s = (c_.cwiseProduct(x_)).sum() + (l_ > 0 ? cl_.dot(u_) : 0.0);
    if (done_merit == kInfD && dobj_s > 1e10 && dobj_s > 1e6 * (1.0 + std::abs(pobj_s))) {
      cur.status = SdpStatus::infeasible;
      capture(cur);
      return cur;
    }
    if (done_merit == kInfD && pobj_s < -1e10 && -pobj_s > 1e6 * (1.0 + std::abs(dobj_s))) {
      cur.status = SdpStatus::unbounded;
      capture(cur);
      return cur;
    }
    if (it >= opt_.max_iters) {
      best.status = SdpStatus::max_iters;
      best.iterations = it;
      return best;
    }

    if (!scaling()) break;
    build_schur();
    if (!factor()) break;

    // Predictor.
    RMatrix rt = -RMatrix(v_.asDiagonal());
    RVector rcl = -u_;
    RVector dy, du, dz;
    RMatrix dxt, dzt;
    direction(rt, rcl, dy, dxt, dzt, du, dz);
    double ap = std::min(1.0, std::min(max_step(v_, dxt), max_step_linear(u_, du)));
    double ad = std::min(1.0, std::min(max_step(v_, dzt), max_step_linear(zl_, dz)));
    const RMatrix vd = v_.asDiagonal();
    double comp_aff = ((vd + ap * dxt).cwiseProduct(vd + ad * dzt)).sum();
    if (l_ > 0) comp_aff += (u_ + ap * du).dot(zl_ + ad * dz);
    const double mu_aff = std::max(0.0, comp_aff) / static_cast<double>(n_ + l_);
    const double sigma = std::min(1.0, std::pow(mu_aff / mu_, 3));

    // Corrector.
    const RMatrix corr = 0.5 * (dxt * dzt + dzt * dxt);
    RMatrix rt2(n_, n_);
    for (int q = 0; q < n_; ++q)
      for (int pi = 0; pi < n_; ++pi) {
        const double diag = pi == q ? sigma * mu_ - v_(pi) * v_(pi) : 0.0;
        rt2(pi, q) = 2.0 * (diag - corr(pi, q)) / (v_(pi) + v_(q));
      }
    RVector rcl2;
    if (l_ > 0) rcl2 = (RVector::Constant(l_, sigma * mu_) - u_.cwiseProduct(zl_) - du.cwiseProduct(dz)).cwiseQuotient(zl_);
    else rcl2 = RVector();
    direction(rt2, rcl2, dy, dxt, dzt, du, dz);
    const double apm = std::min(max_step(v_, dxt), max_step_linear(u_, du));
    const double adm = std::min(max_step(v_, dzt), max_step_linear(zl_, dz));
    const double fac = 0.9 + 0.09 * std::min({1.0, apm, adm});
    ap = std::min(1.0, fac * apm);
    ad = std::min(1.0, fac * adm);

    x_ += ap * (g_ * dxt * g_.transpose());
    x_ = 0.5 * (x_ + x_.transpose());
    z_ += ad * (rd_ - apply_at_matrix(dy));
    z_ = 0.5 * (z_ + z_.transpose());
    y_ += ad * dy;
    if (l_ > 0) {
      u_ += ap * du;
      zl_ += ad * dz;
    }
    last_ap = ap;
    last_ad = ad;
    if (ap < 1e-10 && ad < 1e-10) {
      if (++stalls >= 5) break;
    } else {
      stalls = 0;
    }
  }
  if (done_merit < kInfD) return finish_done();
  if (best.x.size() == 0) capture(best);
  best.status = SdpStatus::numerical_failure;
  return best;
}

}  // namespace

ConicSolution solve_conic(const ConicProblem& p, const ConicOptions& opt) {
  Solver s(p, opt);
  return s.run();
}

}  // namespace treeqcqp
