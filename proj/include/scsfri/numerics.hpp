// SPDX-License-Identifier: Apache-2.0
//
// scsfri: sparse common-support multipath channel estimation (SCS-FRI)
// Copyright (C) 2026 The scsfri authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
// http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// ------------------------------------------------------------------------
//
// Dense numerical kernels shared by the estimation, channel-model and bound
// modules. SVD, eigen and Cholesky factorizations are delegated to Eigen;
// this header owns the small amount of glue the rest of the library relies
// on (TLS solves, balanced companion-matrix root finding, Bessel wrappers).

#pragma once

#include <algorithm>
#include <cmath>
#include <functional>
#include <vector>

#include <Eigen/Dense>

#include "scsfri/types.hpp"

namespace scsfri {

struct TruncatedSvd {
  ComplexMatrix U;            // orthonormal columns, rows(A) x k
  RealVector singular_values; // descending, length k
  ComplexMatrix V;            // orthonormal columns, cols(A) x k
};

/// Rank-k truncation of A = U diag(s) V^H. Eigen's JacobiSVD already returns
/// singular values in descending order, so truncation is a column slice.
inline TruncatedSvd truncated_svd(const ComplexMatrix& A, Eigen::Index k) {
  require(A.rows() >= 1 && A.cols() >= 1, "truncated_svd: empty matrix");
  require(A.allFinite(), "truncated_svd: non-finite entries");
  require(k >= 1 && k <= std::min(A.rows(), A.cols()),
          "truncated_svd: k out of range");
  Eigen::JacobiSVD<ComplexMatrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  return {svd.matrixU().leftCols(k), svd.singularValues().head(k),
          svd.matrixV().leftCols(k)};
}

/// Total-least-squares solve of A X = B: take the SVD of the stacked matrix
/// [A B] and form X = -V12 V22^{-1} from the partitioned right singular
/// vectors. Throws numerical_error when V22 is singular (degenerate
/// geometry: the TLS solution does not exist).
inline ComplexMatrix tls_solve(const ComplexMatrix& A, const ComplexMatrix& B) {
  require(A.rows() == B.rows(), "tls_solve: row mismatch");
  require(A.rows() >= A.cols(), "tls_solve: need at least cols(A) rows");
  const Eigen::Index m = A.cols();
  const Eigen::Index d = B.cols();
  ComplexMatrix stacked(A.rows(), m + d);
  stacked << A, B;
  Eigen::JacobiSVD<ComplexMatrix> svd(stacked, Eigen::ComputeFullV);
  const ComplexMatrix& V = svd.matrixV();
  ComplexMatrix V12 = V.topRightCorner(m, d);
  ComplexMatrix V22 = V.bottomRightCorner(d, d);
  Eigen::FullPivLU<ComplexMatrix> lu(V22);
  if (!lu.isInvertible())
    throw numerical_error("tls_solve: V22 singular (degenerate geometry)");
  // X = -V12 V22^{-1}  <=>  V22^T X^T = -V12^T
  return -(V22.transpose().fullPivLu().solve(V12.transpose())).transpose();
}

/// Monic polynomial (descending coefficients) with the given roots.
inline std::vector<cplx> polynomial_from_roots(const std::vector<cplx>& roots) {
  std::vector<cplx> coeffs{cplx(1.0, 0.0)};
  for (const cplx& r : roots) {
    std::vector<cplx> next(coeffs.size() + 1, cplx(0.0, 0.0));
    for (std::size_t i = 0; i < coeffs.size(); ++i) {
      next[i] += coeffs[i];
      next[i + 1] -= coeffs[i] * r;
    }
    coeffs = std::move(next);
  }
  return coeffs;
}

inline cplx polynomial_eval(const std::vector<cplx>& coeffs, cplx z) {
  cplx acc(0.0, 0.0);
  for (const cplx& c : coeffs) acc = acc * z + c;
  return acc;
}

namespace detail {

// Parlett-Reinsch style balancing restricted to powers of two, so the
// eigenvalues are not perturbed by the scaling itself.
inline void balance_companion(ComplexMatrix& C) {
  const Eigen::Index n = C.rows();
  bool changed = true;
  int guard = 0;
  while (changed && guard++ < 50) {
    changed = false;
    for (Eigen::Index i = 0; i < n; ++i) {
      double row_norm = 0.0, col_norm = 0.0;
      for (Eigen::Index j = 0; j < n; ++j) {
        if (j == i) continue;
        row_norm += std::abs(C(i, j));
        col_norm += std::abs(C(j, i));
      }
      if (row_norm == 0.0 || col_norm == 0.0) continue;
      int exponent = 0;
      std::frexp(row_norm / col_norm, &exponent);
      exponent /= 2;
      if (exponent != 0) {
        const double scale = std::ldexp(1.0, exponent);
        if (row_norm / scale + col_norm * scale < 0.95 * (row_norm + col_norm)) {
          changed = true;
          C.row(i) /= scale;
          C.col(i) *= scale;
        }
      }
    }
  }
}

}  // namespace detail

/// All roots of the polynomial with complex coefficients in descending degree
/// order, computed as eigenvalues of the balanced companion matrix.
inline std::vector<cplx> polynomial_roots(const std::vector<cplx>& coeffs) {
  double scale = 0.0;
  for (const cplx& c : coeffs) scale = std::max(scale, std::abs(c));
  require(scale > 0.0 && std::isfinite(scale), "polynomial_roots: zero polynomial");
  // Drop numerically vanishing leading coefficients before forming the
  // companion matrix; they would send spurious roots to infinity.
  std::size_t first = 0;
  while (first + 1 < coeffs.size() && std::abs(coeffs[first]) <= 1e-14 * scale)
    ++first;
  const std::size_t degree = coeffs.size() - 1 - first;
  require(degree >= 1, "polynomial_roots: degree must be >= 1");

  ComplexMatrix C = ComplexMatrix::Zero(degree, degree);
  const cplx lead = coeffs[first];
  for (std::size_t i = 0; i < degree; ++i)
    C(i, degree - 1) = -coeffs[coeffs.size() - 1 - i] / lead;
  for (std::size_t i = 1; i < degree; ++i) C(i, i - 1) = cplx(1.0, 0.0);
  detail::balance_companion(C);

  Eigen::ComplexEigenSolver<ComplexMatrix> es(C, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw numerical_error("polynomial_roots: eigen solver failed");
  std::vector<cplx> roots(degree);
  for (std::size_t i = 0; i < degree; ++i) roots[i] = es.eigenvalues()(i);
  return roots;
}

/// Bessel function of the first kind, integer order. Wraps the C++17 special
/// function (accurate to well below 1e-12 for |x| <= 50, order <= 60) and
/// extends it to negative arguments via J_l(-x) = (-1)^l J_l(x).
inline double bessel_j(int order, double x) {
  require(order >= 0, "bessel_j: order must be >= 0");
  require(std::isfinite(x), "bessel_j: non-finite argument");
  const double value = std::cyl_bessel_j(static_cast<double>(order), std::abs(x));
  return (x < 0.0 && (order & 1)) ? -value : value;
}

/// Modified Bessel function of the first kind, integer order.
inline double bessel_i(int order, double x) {
  require(order >= 0, "bessel_i: order must be >= 0");
  require(std::isfinite(x), "bessel_i: non-finite argument");
  const double value = std::cyl_bessel_i(static_cast<double>(order), std::abs(x));
  return (x < 0.0 && (order & 1)) ? -value : value;
}

/// Lower-triangular Cholesky factor L with L L^H = R for a Hermitian PSD
/// matrix. Rank-deficient but PSD inputs (correlation matrices of coincident
/// antennas) are handled by retrying with a diagonal jitter of
/// 1e-12 * trace(R)/P, then with an eigenvalue-clipped reconstruction.
inline ComplexMatrix cholesky(const ComplexMatrix& R) {
  require(R.rows() == R.cols() && R.rows() >= 1, "cholesky: square matrix required");
  require(R.allFinite(), "cholesky: non-finite entries");
  const double scale = std::max(1e-300, R.cwiseAbs().maxCoeff());
  require((R - R.adjoint()).cwiseAbs().maxCoeff() <= 1e-10 * scale,
          "cholesky: matrix not Hermitian");
  const Eigen::Index P = R.rows();
  ComplexMatrix H = 0.5 * (R + R.adjoint());
  const double trace = H.real().trace();

  Eigen::LLT<ComplexMatrix> llt(H);
  if (llt.info() == Eigen::Success) return llt.matrixL();

  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(H);
  if (eig.eigenvalues().minCoeff() < -1e-10 * std::max(trace, 1e-300))
    throw numerical_error("cholesky: matrix is not positive semi-definite");

  const double jitter = 1e-12 * trace / static_cast<double>(P);
  llt.compute(H + jitter * ComplexMatrix::Identity(P, P));
  if (llt.info() == Eigen::Success) return llt.matrixL();

  RealVector clipped = eig.eigenvalues().cwiseMax(0.0);
  ComplexMatrix repaired = eig.eigenvectors() * clipped.asDiagonal() *
                           eig.eigenvectors().adjoint();
  llt.compute(repaired + jitter * ComplexMatrix::Identity(P, P));
  if (llt.info() != Eigen::Success)
    throw numerical_error("cholesky: factorization failed");
  return llt.matrixL();
}

/// Adaptive Simpson quadrature on [a, b].
inline double adaptive_simpson(const std::function<double(double)>& f, double a,
                               double b, double tol = 1e-12, int max_depth = 40) {
  struct Impl {
    const std::function<double(double)>& f;
    double recurse(double a, double m, double b, double fa, double fm, double fb,
                   double whole, double tol, int depth) const {
      const double lm = 0.5 * (a + m), rm = 0.5 * (m + b);
      const double flm = f(lm), frm = f(rm);
      const double left = (m - a) / 6.0 * (fa + 4.0 * flm + fm);
      const double right = (b - m) / 6.0 * (fm + 4.0 * frm + fb);
      if (depth <= 0 || std::abs(left + right - whole) <= 15.0 * tol)
        return left + right + (left + right - whole) / 15.0;
      return recurse(a, lm, m, fa, flm, fm, left, 0.5 * tol, depth - 1) +
             recurse(m, rm, b, fm, frm, fb, right, 0.5 * tol, depth - 1);
    }
  } impl{f};
  const double m = 0.5 * (a + b);
  const double fa = f(a), fm = f(m), fb = f(b);
  const double whole = (b - a) / 6.0 * (fa + 4.0 * fm + fb);
  return impl.recurse(a, m, b, fa, fm, fb, whole, tol, max_depth);
}

}  // namespace scsfri
