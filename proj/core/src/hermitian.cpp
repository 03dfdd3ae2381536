#include "treeqcqp/hermitian.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <string>
#include <vector>

#include "treeqcqp/errors.hpp"

namespace treeqcqp {

HermitianMatrix::HermitianMatrix(Eigen::Index n) {
  if (n < 1) throw ValidationError("HermitianMatrix: dimension must be >= 1");
  m_ = CMatrix::Zero(n, n);
}

HermitianMatrix::HermitianMatrix(const CMatrix& m) {
  if (m.rows() < 1 || m.rows() != m.cols()) {
    throw ValidationError("HermitianMatrix: expected a non-empty square matrix, got " +
                          std::to_string(m.rows()) + "x" + std::to_string(m.cols()));
  }
  const double scale = std::max(1.0, m.cwiseAbs().maxCoeff());
  const double asym = (m - m.adjoint()).cwiseAbs().maxCoeff();
  if (!std::isfinite(asym) || asym > kHermitianTol * scale) {
    throw ValidationError("HermitianMatrix: input is not Hermitian (asymmetry " +
                          std::to_string(asym) + ")");
  }
  m_ = m;
  symmetrize();
}

HermitianMatrix::HermitianMatrix(CMatrix m, Trusted) : m_(std::move(m)) { symmetrize(); }

HermitianMatrix HermitianMatrix::from_trusted(CMatrix m) {
  if (m.rows() < 1 || m.rows() != m.cols()) {
    throw ValidationError("HermitianMatrix: expected a non-empty square matrix");
  }
  return HermitianMatrix(std::move(m), Trusted{});
}

void HermitianMatrix::symmetrize() {
  const Eigen::Index n = m_.rows();
  for (Eigen::Index i = 0; i < n; ++i) {
    m_(i, i) = Complex(m_(i, i).real(), 0.0);
    for (Eigen::Index j = i + 1; j < n; ++j) {
      const Complex v = 0.5 * (m_(i, j) + std::conj(m_(j, i)));
      m_(i, j) = v;
      m_(j, i) = std::conj(v);
    }
  }
}

HermitianMatrix HermitianMatrix::identity(Eigen::Index n) {
  HermitianMatrix h(n);
  h.m_.setIdentity();
  return h;
}

HermitianMatrix HermitianMatrix::diagonal(const RVector& d) {
  HermitianMatrix h(d.size());
  for (Eigen::Index i = 0; i < d.size(); ++i) h.m_(i, i) = d(i);
  return h;
}

HermitianMatrix HermitianMatrix::outer(const CVector& x) {
  return HermitianMatrix(CMatrix(x * x.adjoint()), Trusted{});
}

void HermitianMatrix::set(Eigen::Index i, Eigen::Index j, Complex v) {
  if (i == j) {
    if (std::abs(v.imag()) > kHermitianTol * std::max(1.0, std::abs(v))) {
      throw ValidationError("HermitianMatrix::set: diagonal entries must be real");
    }
    m_(i, i) = v.real();
    return;
  }
  m_(i, j) = v;
  m_(j, i) = std::conj(v);
}

void HermitianMatrix::add(Eigen::Index i, Eigen::Index j, Complex v) {
  if (i == j) {
    set(i, i, m_(i, i) + v);
    return;
  }
  set(i, j, m_(i, j) + v);
}

double HermitianMatrix::quadratic_form(const CVector& x) const {
  if (x.size() != dim()) throw ValidationError("quadratic_form: dimension mismatch");
  return x.dot(m_ * x).real();
}

bool HermitianMatrix::is_zero(double tol) const {
  return m_.cwiseAbs().maxCoeff() <= tol;
}

bool HermitianMatrix::is_diagonal(double tol) const {
  for (Eigen::Index i = 0; i < dim(); ++i)
    for (Eigen::Index j = i + 1; j < dim(); ++j)
      if (std::abs(m_(i, j)) > tol) return false;
  return true;
}

HermitianMatrix& HermitianMatrix::operator+=(const HermitianMatrix& o) {
  if (o.dim() != dim()) throw ValidationError("HermitianMatrix +=: dimension mismatch");
  m_ += o.m_;
  return *this;
}

HermitianMatrix& HermitianMatrix::operator-=(const HermitianMatrix& o) {
  if (o.dim() != dim()) throw ValidationError("HermitianMatrix -=: dimension mismatch");
  m_ -= o.m_;
  return *this;
}

HermitianMatrix& HermitianMatrix::operator*=(double s) {
  m_ *= s;
  return *this;
}

// Cyclic Jacobi with the classical rotation formulas; the off-diagonal mass
// decreases monotonically and the iteration converges quadratically.
SymmetricSpectrum jacobi_eigen(const RMatrix& input, int max_sweeps) {
  const Eigen::Index m = input.rows();
  RMatrix a = 0.5 * (input + input.transpose());
  RMatrix v = RMatrix::Identity(m, m);

  const double total = a.squaredNorm();
  for (int sweep = 0; sweep < max_sweeps; ++sweep) {
    double off = 0.0;
    for (Eigen::Index p = 0; p < m; ++p)
      for (Eigen::Index q = p + 1; q < m; ++q) off += a(p, q) * a(p, q);
    if (off <= 1e-32 * total || off == 0.0) break;

    for (Eigen::Index p = 0; p < m; ++p) {
      for (Eigen::Index q = p + 1; q < m; ++q) {
        const double apq = a(p, q);
        if (apq == 0.0) continue;
        const double app = a(p, p);
        const double aqq = a(q, q);
        // Skip rotations that cannot change the diagonal in floating point.
        if (sweep > 3 && std::abs(apq) < 1e-18 * (std::abs(app) + std::abs(aqq))) {
          a(p, q) = a(q, p) = 0.0;
          continue;
        }
        const double theta = (aqq - app) / (2.0 * apq);
        const double t = (theta >= 0 ? 1.0 : -1.0) / (std::abs(theta) + std::sqrt(theta * theta + 1.0));
        const double c = 1.0 / std::sqrt(t * t + 1.0);
        const double s = t * c;

        for (Eigen::Index k = 0; k < m; ++k) {
          const double akp = a(k, p);
          const double akq = a(k, q);
          a(k, p) = c * akp - s * akq;
          a(k, q) = s * akp + c * akq;
        }
        for (Eigen::Index k = 0; k < m; ++k) {
          const double apk = a(p, k);
          const double aqk = a(q, k);
          a(p, k) = c * apk - s * aqk;
          a(q, k) = s * apk + c * aqk;
        }
        a(p, q) = a(q, p) = 0.0;
        for (Eigen::Index k = 0; k < m; ++k) {
          const double vkp = v(k, p);
          const double vkq = v(k, q);
          v(k, p) = c * vkp - s * vkq;
          v(k, q) = s * vkp + c * vkq;
        }
      }
    }
  }

  std::vector<Eigen::Index> order(static_cast<size_t>(m));
  std::iota(order.begin(), order.end(), 0);
  std::stable_sort(order.begin(), order.end(),
                   [&](Eigen::Index i, Eigen::Index j) { return a(i, i) > a(j, j); });
  SymmetricSpectrum out;
  out.eigenvalues.resize(m);
  out.eigenvectors.resize(m, m);
  for (Eigen::Index k = 0; k < m; ++k) {
    out.eigenvalues(k) = a(order[k], order[k]);
    out.eigenvectors.col(k) = v.col(order[k]);
  }
  return out;
}

namespace {

// Every eigenvalue of H appears twice in its real embedding, with real
// eigenvectors [x; y] and [-y; x] that both map to the complex direction
// x + iy. Within each cluster of (numerically) equal embedded eigenvalues we
// greedily keep the complex directions with the largest component orthogonal
// to those already accepted.
Spectrum complex_spectrum_from_embedding(const HermitianMatrix& h, const SymmetricSpectrum& rs) {
  const Eigen::Index n = h.dim();
  const Eigen::Index m = 2 * n;
  const double scale = 1.0 + h.frobenius_norm();
  const double cluster_tol = 1e-11 * scale;

  std::vector<CVector> basis;
  std::vector<double> values;
  basis.reserve(static_cast<size_t>(n));

  auto residual_of = [&](Eigen::Index k) {
    CVector u(n);
    for (Eigen::Index i = 0; i < n; ++i)
      u(i) = Complex(rs.eigenvectors(i, k), rs.eigenvectors(n + i, k));
    for (const auto& b : basis) u -= b * b.dot(u);
    return u;
  };
  auto accept = [&](CVector u) {
    u /= u.norm();
    for (const auto& b : basis) u -= b * b.dot(u);  // second GS pass
    u /= u.norm();
    values.push_back(h.quadratic_form(u));
    basis.push_back(std::move(u));
  };

  Eigen::Index start = 0;
  std::vector<bool> used(static_cast<size_t>(m), false);
  while (start < m && static_cast<Eigen::Index>(basis.size()) < n) {
    Eigen::Index end = start + 1;
    while (end < m && rs.eigenvalues(end - 1) - rs.eigenvalues(end) <= cluster_tol) ++end;
    const Eigen::Index want = (end - start + 1) / 2;
    for (Eigen::Index pick = 0; pick < want && static_cast<Eigen::Index>(basis.size()) < n; ++pick) {
      double best = -1.0;
      Eigen::Index best_k = -1;
      CVector best_u;
      for (Eigen::Index k = start; k < end; ++k) {
        if (used[static_cast<size_t>(k)]) continue;
        CVector u = residual_of(k);
        const double r = u.norm();
        if (r > best) {
          best = r;
          best_k = k;
          best_u = std::move(u);
        }
      }
      if (best_k < 0 || best < 0.5) break;
      used[static_cast<size_t>(best_k)] = true;
      accept(std::move(best_u));
    }
    start = end;
  }

  // Fallback when clustering missed a pairing: take the best remaining
  // directions globally.
  while (static_cast<Eigen::Index>(basis.size()) < n) {
    double best = -1.0;
    Eigen::Index best_k = -1;
    CVector best_u;
    for (Eigen::Index k = 0; k < m; ++k) {
      if (used[static_cast<size_t>(k)]) continue;
      CVector u = residual_of(k);
      if (u.norm() > best) {
        best = u.norm();
        best_k = k;
        best_u = std::move(u);
      }
    }
    if (best_k < 0) throw ContractViolation("eig_hermitian: could not pair embedded eigenvectors");
    used[static_cast<size_t>(best_k)] = true;
    accept(std::move(best_u));
  }

  std::vector<size_t> order(basis.size());
  std::iota(order.begin(), order.end(), size_t{0});
  std::stable_sort(order.begin(), order.end(),
                   [&](size_t i, size_t j) { return values[i] > values[j]; });
  Spectrum s;
  s.eigenvalues.resize(n);
  s.eigenvectors.resize(n, n);
  for (Eigen::Index k = 0; k < n; ++k) {
    s.eigenvalues(k) = values[order[static_cast<size_t>(k)]];
    s.eigenvectors.col(k) = basis[order[static_cast<size_t>(k)]];
  }
  return s;
}

}  // namespace

Spectrum eig_hermitian(const HermitianMatrix& h) {
  if (!h.matrix().allFinite()) throw ValidationError("eig_hermitian: matrix has non-finite entries");
  if (h.dim() == 1) {
    Spectrum s;
    s.eigenvalues = RVector::Constant(1, h(0, 0).real());
    s.eigenvectors = CMatrix::Ones(1, 1);
    return s;
  }
  return complex_spectrum_from_embedding(h, jacobi_eigen(real_embedding(h)));
}

double trace_product(const HermitianMatrix& h1, const HermitianMatrix& h2) {
  if (h1.dim() != h2.dim()) throw ValidationError("trace_product: dimension mismatch");
  // tr(H1 H2) = sum_ij H1_ij H2_ji = sum_ij H1_ij conj(H2_ij)
  return (h1.matrix().array() * h2.matrix().conjugate().array()).sum().real();
}

double min_eigenvalue(const HermitianMatrix& h) { return eig_hermitian(h).min(); }

double max_eigenvalue(const HermitianMatrix& h) { return eig_hermitian(h).max(); }

double spectral_norm(const HermitianMatrix& h) {
  const Spectrum s = eig_hermitian(h);
  return std::max(std::abs(s.max()), std::abs(s.min()));
}

bool is_psd(const Spectrum& s, double tau) {
  const double norm2 = std::max(std::abs(s.max()), std::abs(s.min()));
  return s.min() >= -tau * (1.0 + norm2);
}

bool is_psd(const HermitianMatrix& h, double tau) { return is_psd(eig_hermitian(h), tau); }

int numeric_rank(const Spectrum& s, double tau_rank, double abs_floor) {
  if (s.eigenvalues.size() == 0) return 0;
  const double cutoff = std::max(tau_rank * std::max(s.max(), kTauAbs), abs_floor);
  int r = 0;
  for (Eigen::Index i = 0; i < s.eigenvalues.size(); ++i)
    if (s.eigenvalues(i) > cutoff) ++r;
  return r;
}

RMatrix real_embedding(const HermitianMatrix& h) {
  const Eigen::Index n = h.dim();
  const RMatrix re = h.matrix().real();
  const RMatrix im = h.matrix().imag();
  RMatrix e(2 * n, 2 * n);
  e.topLeftCorner(n, n) = re;
  e.topRightCorner(n, n) = -im;
  e.bottomLeftCorner(n, n) = im;
  e.bottomRightCorner(n, n) = re;
  return e;
}

HermitianMatrix from_real_embedding(const RMatrix& x) {
  if (x.rows() != x.cols() || x.rows() % 2 != 0 || x.rows() == 0) {
    throw ValidationError("from_real_embedding: expected a 2n x 2n matrix");
  }
  const Eigen::Index n = x.rows() / 2;
  RMatrix a = 0.5 * (x.topLeftCorner(n, n) + x.bottomRightCorner(n, n));
  RMatrix b = 0.5 * (x.bottomLeftCorner(n, n) - x.topRightCorner(n, n));
  a = 0.5 * (a + a.transpose()).eval();
  b = 0.5 * (b - b.transpose()).eval();
  CMatrix w(n, n);
  w.real() = a;
  w.imag() = b;
  return HermitianMatrix::from_trusted(std::move(w));
}

}  // namespace treeqcqp
