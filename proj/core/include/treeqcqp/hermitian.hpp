#pragma once

#include <complex>
#include <cstddef>

#include <Eigen/Dense>

namespace treeqcqp {

using Complex = std::complex<double>;
using CVector = Eigen::VectorXcd;
using CMatrix = Eigen::MatrixXcd;
using RVector = Eigen::VectorXd;
using RMatrix = Eigen::MatrixXd;

// Numerical thresholds shared across the library.
inline constexpr double kTauPsd = 1e-8;    // relative PSD slack
inline constexpr double kTauRank = 1e-5;   // relative eigenvalue cutoff for rank
inline constexpr double kTauAbs = 1e-12;   // absolute floor for scales
inline constexpr double kTauZero = 1e-12;  // "nonzero entry" cutoff for graphs
inline constexpr double kHermitianTol = 1e-12;

/// Dense complex Hermitian matrix.
///
/// Construction validates Hermitian structure (relative asymmetry at most
/// 1e-12) and then stores an exactly Hermitian copy: the strict lower
/// triangle mirrors the conjugated upper triangle and the diagonal is real.
class HermitianMatrix {
 public:
  HermitianMatrix() : HermitianMatrix(1) {}
  explicit HermitianMatrix(Eigen::Index n);
  explicit HermitianMatrix(const CMatrix& m);

  static HermitianMatrix identity(Eigen::Index n);
  static HermitianMatrix zeros(Eigen::Index n) { return HermitianMatrix(n); }
  static HermitianMatrix diagonal(const RVector& d);
  /// x x^H
  static HermitianMatrix outer(const CVector& x);
  /// Wraps a matrix that is Hermitian by construction; only symmetrizes.
  static HermitianMatrix from_trusted(CMatrix m);

  Eigen::Index dim() const { return m_.rows(); }
  const CMatrix& matrix() const { return m_; }
  Complex operator()(Eigen::Index i, Eigen::Index j) const { return m_(i, j); }

  /// Sets entry (i, j) and its mirror (j, i); a diagonal value must be real.
  void set(Eigen::Index i, Eigen::Index j, Complex v);
  void add(Eigen::Index i, Eigen::Index j, Complex v);

  /// x^H H x (real for Hermitian H).
  double quadratic_form(const CVector& x) const;
  double frobenius_norm() const { return m_.norm(); }
  double trace() const { return m_.diagonal().real().sum(); }
  bool is_zero(double tol = 0.0) const;
  bool is_diagonal(double tol = kTauZero) const;

  HermitianMatrix& operator+=(const HermitianMatrix& o);
  HermitianMatrix& operator-=(const HermitianMatrix& o);
  HermitianMatrix& operator*=(double s);
  friend HermitianMatrix operator+(HermitianMatrix a, const HermitianMatrix& b) { return a += b; }
  friend HermitianMatrix operator-(HermitianMatrix a, const HermitianMatrix& b) { return a -= b; }
  friend HermitianMatrix operator*(double s, HermitianMatrix a) { return a *= s; }
  friend HermitianMatrix operator-(HermitianMatrix a) { return a *= -1.0; }

 private:
  struct Trusted {};
  HermitianMatrix(CMatrix m, Trusted);
  void symmetrize();

  CMatrix m_;
};

/// Eigen-decomposition with eigenvalues sorted descending and orthonormal
/// eigenvectors stored column-wise in matching order.
struct Spectrum {
  RVector eigenvalues;
  CMatrix eigenvectors;

  double max() const { return eigenvalues(0); }
  double min() const { return eigenvalues(eigenvalues.size() - 1); }
};

/// Real symmetric eigen-decomposition by cyclic Jacobi rotations. Eigenvalues
/// descending, eigenvectors column-matched.
struct SymmetricSpectrum {
  RVector eigenvalues;
  RMatrix eigenvectors;
};
SymmetricSpectrum jacobi_eigen(const RMatrix& a, int max_sweeps = 100);

Spectrum eig_hermitian(const HermitianMatrix& h);

/// tr(H1 H2); throws ValidationError on dimension mismatch.
double trace_product(const HermitianMatrix& h1, const HermitianMatrix& h2);

double min_eigenvalue(const HermitianMatrix& h);
double max_eigenvalue(const HermitianMatrix& h);
double spectral_norm(const HermitianMatrix& h);

/// rho_min[H] >= -tau * (1 + ||H||_2)
bool is_psd(const HermitianMatrix& h, double tau = kTauPsd);
bool is_psd(const Spectrum& s, double tau = kTauPsd);

/// Number of eigenvalues above max(tau_rank * max(rho_1, kTauAbs), abs_floor).
int numeric_rank(const Spectrum& s, double tau_rank = kTauRank, double abs_floor = 0.0);

/// [[Re H, -Im H], [Im H, Re H]]
RMatrix real_embedding(const HermitianMatrix& h);

/// Inverse of real_embedding after projecting onto the embedding's block
/// symmetry: A = (X11 + X22)/2, B = (X21 - X12)/2, both (anti)symmetrized.
HermitianMatrix from_real_embedding(const RMatrix& x);

}  // namespace treeqcqp
