#include "treeqcqp/simplex.hpp"

#include <cmath>
#include <limits>
#include <vector>

#include "treeqcqp/errors.hpp"

namespace treeqcqp {
namespace {

// Tableau layout: rows 0..m-1 are constraints, row m is the reduced-cost row
// (stored as -c so that a negative entry marks an improving column). The last
// column holds the right-hand side.
struct Tableau {
  RMatrix t;
  std::vector<int> basis;
  int pivots = 0;

  int rows() const { return static_cast<int>(t.rows()) - 1; }
  int cols() const { return static_cast<int>(t.cols()) - 1; }

  void pivot(int r, int c) {
    t.row(r) /= t(r, c);
    for (int i = 0; i <= rows(); ++i) {
      if (i == r) continue;
      const double f = t(i, c);
      if (f != 0.0) t.row(i) -= f * t.row(r);
    }
    basis[static_cast<size_t>(r)] = c;
    ++pivots;
  }

  // Returns false when the objective is unbounded along an entering column.
  bool optimize(int allowed_cols, double tol) {
    for (int guard = 0; guard < 50000; ++guard) {
      int enter = -1;
      for (int j = 0; j < allowed_cols; ++j) {
        if (t(rows(), j) < -tol) {
          enter = j;  // Bland: lowest index
          break;
        }
      }
      if (enter < 0) return true;
      int leave = -1;
      double best = std::numeric_limits<double>::infinity();
      for (int i = 0; i < rows(); ++i) {
        if (t(i, enter) > tol) {
          const double ratio = t(i, cols()) / t(i, enter);
          if (ratio < best - 1e-14 ||
              (std::abs(ratio - best) <= 1e-14 && leave >= 0 &&
               basis[static_cast<size_t>(i)] < basis[static_cast<size_t>(leave)])) {
            best = ratio;
            leave = i;
          }
        }
      }
      if (leave < 0) return false;
      pivot(leave, enter);
    }
    throw std::runtime_error("solve_lp_max: pivot limit exceeded");
  }
};

}  // namespace

LpResult solve_lp_max(const RMatrix& a, const RVector& b, const RVector& c, double tol) {
  const int m = static_cast<int>(a.rows());
  const int n = static_cast<int>(a.cols());
  if (b.size() != m || c.size() != n) throw ValidationError("solve_lp_max: dimension mismatch");

  // Phase 1: artificial variable per row, minimize their sum.
  Tableau tab;
  tab.t = RMatrix::Zero(m + 1, n + m + 1);
  tab.basis.resize(static_cast<size_t>(m));
  for (int i = 0; i < m; ++i) {
    const double sgn = b(i) < 0 ? -1.0 : 1.0;
    tab.t.row(i).head(n) = sgn * a.row(i);
    tab.t(i, n + i) = 1.0;
    tab.t(i, n + m) = sgn * b(i);
    tab.basis[static_cast<size_t>(i)] = n + i;
  }
  // Reduced costs of "maximize -sum(artificials)" after pricing out the basis.
  for (int i = 0; i < m; ++i) {
    tab.t.row(m).head(n) -= tab.t.row(i).head(n);
    tab.t(m, n + m) -= tab.t(i, n + m);
  }
  tab.optimize(n + m, tol);

  LpResult res;
  const double scale = 1.0 + b.cwiseAbs().maxCoeff();
  if (-tab.t(m, n + m) > 1e-9 * scale) {
    res.status = LpStatus::infeasible;
    res.pivots = tab.pivots;
    return res;
  }
  // Drive artificials out of the basis where possible.
  for (int i = 0; i < m; ++i) {
    if (tab.basis[static_cast<size_t>(i)] < n) continue;
    for (int j = 0; j < n; ++j) {
      if (std::abs(tab.t(i, j)) > tol) {
        tab.pivot(i, j);
        break;
      }
    }
  }

  // Phase 2 on the original columns only.
  RMatrix t2 = RMatrix::Zero(m + 1, n + 1);
  t2.topLeftCorner(m, n) = tab.t.topLeftCorner(m, n);
  t2.col(n).head(m) = tab.t.col(n + m).head(m);
  t2.row(m).head(n) = -c.transpose();
  Tableau p2;
  p2.t = std::move(t2);
  p2.basis = tab.basis;
  p2.pivots = tab.pivots;
  for (int i = 0; i < m; ++i) {
    const int bi = p2.basis[static_cast<size_t>(i)];
    if (bi < n) {
      const double f = p2.t(m, bi);
      if (f != 0.0) p2.t.row(m) -= f * p2.t.row(i);
    } else {
      // Redundant row whose artificial stayed basic at level zero.
      p2.t.row(i).setZero();
      p2.basis[static_cast<size_t>(i)] = -1;
    }
  }
  // Rows with a removed basis entry are inert; give them a harmless basis
  // marker so ratio tests skip them (all-zero rows never qualify).
  for (auto& bi : p2.basis)
    if (bi < 0) bi = n;  // sentinel beyond original columns

  const bool bounded = p2.optimize(n, tol);
  res.pivots = p2.pivots;
  if (!bounded) {
    res.status = LpStatus::unbounded;
    return res;
  }
  res.status = LpStatus::optimal;
  res.x = RVector::Zero(n);
  for (int i = 0; i < m; ++i) {
    const int bi = p2.basis[static_cast<size_t>(i)];
    if (bi < n) res.x(bi) = p2.t(i, n);
  }
  res.objective = c.dot(res.x);
  return res;
}

}  // namespace treeqcqp
