#include <gtest/gtest.h>

#include <cmath>
#include <random>

#include "../support/oracles.hpp"
#include "treeqcqp/errors.hpp"
#include "treeqcqp/hermitian.hpp"

using namespace treeqcqp;

namespace {

const Complex I(0.0, 1.0);

HermitianMatrix mat2(Complex a, Complex b, Complex c, Complex d) {
  CMatrix m(2, 2);
  m << a, b, c, d;
  return HermitianMatrix(m);
}

}  // namespace

TEST(Hermitian, RejectsNonHermitian) {
  CMatrix m(2, 2);
  m << 1.0, 2.0, 3.0, 1.0;
  EXPECT_THROW(HermitianMatrix{m}, ValidationError);
  CMatrix d(2, 2);
  d << Complex(1.0, 1.0), 0.0, 0.0, 1.0;
  EXPECT_THROW(HermitianMatrix{d}, ValidationError);
}

TEST(Hermitian, EigIdentity) {
  const Spectrum s = eig_hermitian(HermitianMatrix::identity(2));
  EXPECT_NEAR(s.eigenvalues(0), 1.0, 1e-14);
  EXPECT_NEAR(s.eigenvalues(1), 1.0, 1e-14);
  EXPECT_LT((s.eigenvectors.adjoint() * s.eigenvectors - CMatrix::Identity(2, 2)).norm(), 1e-12);
}

TEST(Hermitian, EigTwoByTwo) {
  const HermitianMatrix h = mat2(1.0, I, -I, 1.0);
  const Spectrum s = eig_hermitian(h);
  EXPECT_NEAR(s.eigenvalues(0), 2.0, 1e-12);
  EXPECT_NEAR(s.eigenvalues(1), 0.0, 1e-12);
  CVector expect(2);
  expect << I / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  EXPECT_NEAR(std::abs(expect.dot(s.eigenvectors.col(0))), 1.0, 1e-12);
}

TEST(Hermitian, EigDiagonal) {
  RVector d(2);
  d << 3.0, -1.0;
  const Spectrum s = eig_hermitian(HermitianMatrix::diagonal(d));
  EXPECT_NEAR(s.max(), 3.0, 1e-14);
  EXPECT_NEAR(s.min(), -1.0, 1e-14);
  EXPECT_NEAR(std::abs(s.eigenvectors(0, 0)), 1.0, 1e-12);
  EXPECT_NEAR(std::abs(s.eigenvectors(1, 1)), 1.0, 1e-12);
}

TEST(Hermitian, EigDeterministic) {
  std::mt19937_64 rng(7);
  const HermitianMatrix h = oracle::random_hermitian(12, rng);
  const Spectrum a = eig_hermitian(h);
  const Spectrum b = eig_hermitian(h);
  EXPECT_EQ(a.eigenvalues, b.eigenvalues);
  EXPECT_EQ(a.eigenvectors, b.eigenvectors);
}

TEST(Hermitian, TraceProductExamples) {
  RVector d(2);
  d << 1.0, 0.0;
  EXPECT_NEAR(trace_product(HermitianMatrix::identity(2), HermitianMatrix::diagonal(d)), 1.0, 1e-15);
  RVector d2(2);
  d2 << 2.0, 3.0;
  EXPECT_NEAR(trace_product(HermitianMatrix::diagonal(d2), HermitianMatrix::diagonal(d)), 2.0, 1e-15);
  const HermitianMatrix h1 = mat2(1.0, I, -I, 1.0);
  const HermitianMatrix h2 = mat2(1.0, -I, I, 1.0);
  EXPECT_NEAR(trace_product(h1, h2), 0.0, 1e-15);
  EXPECT_NEAR(min_eigenvalue(h1), 0.0, 1e-12);
}

TEST(Hermitian, TraceProductDimensionMismatch) {
  EXPECT_THROW(trace_product(HermitianMatrix::identity(2), HermitianMatrix::identity(3)), ValidationError);
}

TEST(Hermitian, MinEigenvalueExamples) {
  RVector d(3);
  d << 5.0, 2.0, -1.0;
  EXPECT_NEAR(min_eigenvalue(HermitianMatrix::diagonal(d)), -1.0, 1e-14);
  EXPECT_NEAR(min_eigenvalue(HermitianMatrix::identity(4)), 1.0, 1e-14);
  EXPECT_NEAR(min_eigenvalue(mat2(2.0, Complex(1, 1), Complex(1, -1), 2.0)), 2.0 - std::sqrt(2.0), 1e-12);
}

TEST(Hermitian, NumericRankExamples) {
  auto spec = [](std::initializer_list<double> v) {
    Spectrum s;
    s.eigenvalues = RVector::Map(v.begin(), static_cast<Eigen::Index>(v.size()));
    return s;
  };
  EXPECT_EQ(numeric_rank(spec({2.0, 0.0}), 1e-5), 1);
  EXPECT_EQ(numeric_rank(spec({1.0, 1e-9}), 1e-5), 1);
  EXPECT_EQ(numeric_rank(spec({1.0, 0.5, 1e-7}), 1e-5), 2);
  EXPECT_EQ(numeric_rank(eig_hermitian(HermitianMatrix::zeros(3))), 0);
}

TEST(Hermitian, RealEmbeddingExamples) {
  const RMatrix e = real_embedding(mat2(0.0, I, -I, 0.0));
  RMatrix expect(4, 4);
  expect << 0, 0, 0, -1, 0, 0, 1, 0, 0, 1, 0, 0, -1, 0, 0, 0;
  EXPECT_EQ(e, expect);
  EXPECT_EQ(real_embedding(HermitianMatrix::identity(2)), RMatrix::Identity(4, 4));
}

TEST(Hermitian, RankOneEmbedsToDoubledEigenvalue) {
  CVector x(2);
  x << 1.0, I;
  const RMatrix e = real_embedding(HermitianMatrix::outer(x));
  Eigen::SelfAdjointEigenSolver<RMatrix> es(e);
  const RVector ev = es.eigenvalues();
  EXPECT_NEAR(ev(3), 2.0, 1e-12);
  EXPECT_NEAR(ev(2), 2.0, 1e-12);
  EXPECT_NEAR(ev(1), 0.0, 1e-12);
  EXPECT_NEAR(ev(0), 0.0, 1e-12);
}

TEST(Hermitian, EmbeddingRoundTrip) {
  std::mt19937_64 rng(3);
  for (int n = 1; n <= 6; ++n) {
    const HermitianMatrix h = oracle::random_hermitian(n, rng);
    EXPECT_LT((from_real_embedding(real_embedding(h)).matrix() - h.matrix()).norm(), 1e-14);
  }
}

TEST(Hermitian, DegenerateInputs) {
  const HermitianMatrix one = HermitianMatrix::identity(1);
  EXPECT_NEAR(eig_hermitian(one).max(), 1.0, 1e-15);
  const Spectrum z = eig_hermitian(HermitianMatrix::zeros(3));
  EXPECT_EQ(z.eigenvalues, RVector::Zero(3));
  EXPECT_TRUE(is_psd(HermitianMatrix::zeros(3)));
}

TEST(HermitianProperty, TraceLowerBound) {
  std::mt19937_64 rng(20240101);
  std::uniform_int_distribution<int> dim(1, 8);
  for (int t = 0; t < 1000; ++t) {
    const int n = dim(rng);
    const int r1 = std::uniform_int_distribution<int>(1, n)(rng);
    const int r2 = std::uniform_int_distribution<int>(1, n)(rng);
    const HermitianMatrix h1 = oracle::random_psd(n, r1, rng);
    const HermitianMatrix h2 = oracle::random_psd(n, r2, rng);
    EXPECT_GE(trace_product(h1, h2), min_eigenvalue(h1) * max_eigenvalue(h2) - 1e-9) << "trial " << t;
  }
}

TEST(HermitianProperty, SpectrumReconstructionAndOrthonormality) {
  std::mt19937_64 rng(11);
  for (int n : {1, 2, 3, 5, 8, 13, 21, 34, 50}) {
    for (int rep = 0; rep < 3; ++rep) {
      const HermitianMatrix h = oracle::random_hermitian(n, rng);
      const Spectrum s = eig_hermitian(h);
      const CMatrix& u = s.eigenvectors;
      const double scale = 1.0 + h.frobenius_norm();
      EXPECT_LT((u.adjoint() * u - CMatrix::Identity(n, n)).norm(), 1e-10 * n);
      const CMatrix rec = u * s.eigenvalues.cast<Complex>().asDiagonal() * u.adjoint();
      EXPECT_LT((rec - h.matrix()).norm(), 1e-10 * scale);
      for (int i = 1; i < n; ++i) EXPECT_GE(s.eigenvalues(i - 1), s.eigenvalues(i));
    }
  }
}

TEST(HermitianProperty, EmbeddingLinearAndRankDoubling) {
  std::mt19937_64 rng(5);
  for (int t = 0; t < 50; ++t) {
    const int n = std::uniform_int_distribution<int>(1, 8)(rng);
    const HermitianMatrix a = oracle::random_hermitian(n, rng);
    const HermitianMatrix b = oracle::random_hermitian(n, rng);
    const double s = std::normal_distribution<double>()(rng);
    EXPECT_LT((real_embedding(a + b) - real_embedding(a) - real_embedding(b)).norm(), 1e-13);
    EXPECT_LT((real_embedding(s * a) - s * real_embedding(a)).norm(), 1e-13);

    const int r = std::uniform_int_distribution<int>(0, n)(rng);
    const HermitianMatrix w = r == 0 ? HermitianMatrix::zeros(n) : oracle::random_psd(n, r, rng);
    const int complex_rank = numeric_rank(eig_hermitian(w));
    const SymmetricSpectrum es = jacobi_eigen(real_embedding(w));
    Spectrum real_spec;
    real_spec.eigenvalues = es.eigenvalues;
    EXPECT_EQ(numeric_rank(real_spec), 2 * complex_rank);
    EXPECT_EQ(complex_rank, r);
  }
}
