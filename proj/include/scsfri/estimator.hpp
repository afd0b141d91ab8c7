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
// SCS-FRI core: block-Toeplitz data matrices of channel DFT coefficients,
// Block-Prony TLS, Block-ESPRIT TLS, Block-Cadzow denoising, the combined
// pipeline, Vandermonde amplitude recovery, and the lowpass-interpolation
// baseline.
//
// Coefficient convention: a Q x P matrix whose row i holds, for antenna p,
// the channel DFT coefficient at carrier bins[i], where bins is a strictly
// increasing arithmetic grid with step D (DFT layouts: bins = {mD, |m| <= M};
// Walsh-Hadamard layouts use a half-offset grid). Rows therefore satisfy
//   z_p[i] = sum_k c_{k,p} rho_k^i * phase_k,   rho_k = exp(-2 pi j D t_k / tau),
// and every support algorithm below only relies on the geometric progression
// in i. Grid offsets affect amplitude phases only, which the Vandermonde
// solve handles through the true bin values.

#pragma once

#include <algorithm>
#include <cmath>
#include <numeric>
#include <vector>

#include "scsfri/numerics.hpp"
#include "scsfri/pilots.hpp"
#include "scsfri/types.hpp"

namespace scsfri {

/// P Toeplitz blocks of size (Q+1-L) x L built from per-antenna coefficient
/// sequences of length Q; block entry (r, c) = z_p[L-1+r-c].
struct DataMatrix {
  std::vector<ComplexMatrix> blocks;
  int L = 0;
  int Q = 0;

  int antenna_count() const { return static_cast<int>(blocks.size()); }
  int block_rows() const { return Q + 1 - L; }

  ComplexMatrix stacked() const {
    const int P = antenna_count();
    ComplexMatrix H(static_cast<Eigen::Index>(P) * block_rows(), L);
    for (int p = 0; p < P; ++p) H.middleRows(p * block_rows(), block_rows()) = blocks[p];
    return H;
  }
};

inline DataMatrix build_data_matrix(const ComplexMatrix& coeffs, int L) {
  const int Q = static_cast<int>(coeffs.rows());
  const int P = static_cast<int>(coeffs.cols());
  require(P >= 1, "build_data_matrix: no antennas");
  require(L >= 1 && L <= Q, "build_data_matrix: L out of range");
  DataMatrix H;
  H.L = L;
  H.Q = Q;
  H.blocks.resize(P);
  const int rows = Q + 1 - L;
  for (int p = 0; p < P; ++p) {
    ComplexMatrix block(rows, L);
    for (int r = 0; r < rows; ++r)
      for (int c = 0; c < L; ++c) block(r, c) = coeffs(L - 1 + r - c, p);
    H.blocks[p] = std::move(block);
  }
  return H;
}

/// Reads the coefficient sequence back from the first row and first column of
/// each (Toeplitz) block; the exact inverse of build_data_matrix.
inline ComplexMatrix coefficients_from(const DataMatrix& H) {
  const int P = H.antenna_count();
  ComplexMatrix coeffs(H.Q, P);
  for (int p = 0; p < P; ++p) {
    const ComplexMatrix& block = H.blocks[p];
    for (int c = 0; c < H.L; ++c) coeffs(H.L - 1 - c, p) = block(0, c);
    for (int r = 0; r < H.block_rows(); ++r) coeffs(H.L - 1 + r, p) = block(r, 0);
  }
  return coeffs;
}

/// Common-support estimate: sorted distinct ToAs plus diagnostics.
struct SupportEstimate {
  std::vector<double> toas;
  std::vector<cplx> filter;              // annihilating coefficients (Prony)
  std::vector<double> singular_values;   // of the stacked data matrix
  bool degenerate = false;               // repeated-root warning
};

namespace detail {

/// Right singular vectors and singular values of the stacked data matrix,
/// obtained from the L x L Gram matrix H^H H. The data matrix is tall (P
/// blocks stacked), so this costs a fraction of a full SVD; the squared
/// spectrum limits the smallest resolvable singular value to about 1e-8 of
/// the largest, which is far below the noise floor of every consumer here.
struct RowSpace {
  ComplexMatrix V;   // L x L, columns ordered by descending singular value
  RealVector sigma;  // descending
};

inline RowSpace row_space(const ComplexMatrix& stacked) {
  const Eigen::Index L = stacked.cols();
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> es(stacked.adjoint() * stacked);
  if (es.info() != Eigen::Success)
    throw numerical_error("row_space: eigen solver failed");
  RowSpace out;
  out.V.resize(L, L);
  out.sigma.resize(L);
  for (Eigen::Index i = 0; i < L; ++i) {
    out.V.col(i) = es.eigenvectors().col(L - 1 - i);
    out.sigma(i) = std::sqrt(std::max(0.0, es.eigenvalues()(L - 1 - i)));
  }
  return out;
}

inline double toa_from_root(cplx root, double tau) {
  double t = -tau / (2.0 * M_PI) * std::arg(root);
  t = std::fmod(t, tau);
  if (t < 0.0) t += tau;
  return t;
}

inline void flag_degenerate_roots(SupportEstimate& est, const std::vector<cplx>& roots) {
  for (std::size_t i = 0; i < roots.size(); ++i)
    for (std::size_t j = i + 1; j < roots.size(); ++j) {
      double gap = std::abs(std::remainder(std::arg(roots[i]) - std::arg(roots[j]),
                                           2.0 * M_PI));
      if (gap < 1e-9) est.degenerate = true;
    }
}

}  // namespace detail

/// Block-Prony in the total-least-squares sense: the annihilating filter is the
/// right singular vector of H^{(K+1)} associated to the least singular value;
/// the ToAs are the root arguments scaled by -tau/(2 pi), mapped into [0, tau).
inline SupportEstimate block_prony_tls(const DataMatrix& H, int K, double tau) {
  require(H.L == K + 1, "block_prony_tls: data matrix must have L = K+1");
  require(H.block_rows() >= 1, "block_prony_tls: empty data matrix");
  const ComplexMatrix stacked = H.stacked();
  require(stacked.rows() >= stacked.cols(),
          "block_prony_tls: not enough rows for K paths");
  const detail::RowSpace space = detail::row_space(stacked);

  SupportEstimate est;
  est.singular_values.assign(space.sigma.data(), space.sigma.data() + space.sigma.size());

  ComplexVector v = space.V.col(K);
  std::vector<cplx> coeffs(v.data(), v.data() + v.size());
  std::vector<cplx> roots = polynomial_roots(coeffs);
  if (static_cast<int>(roots.size()) > K) {
    // Numerical degree inflation: signal roots are unit-modulus in the
    // noiseless model, so keep the K closest to the unit circle.
    std::sort(roots.begin(), roots.end(), [](const cplx& a, const cplx& b) {
      return std::abs(std::abs(a) - 1.0) < std::abs(std::abs(b) - 1.0);
    });
    roots.resize(K);
  }
  if (static_cast<int>(roots.size()) < K)
    throw numerical_error("block_prony_tls: annihilating filter degenerated");
  detail::flag_degenerate_roots(est, roots);

  // Normalized filter [1, -f_1, ..., -f_K].
  if (std::abs(v(0)) > 0.0) {
    est.filter.resize(v.size());
    for (Eigen::Index i = 0; i < v.size(); ++i) est.filter[i] = v(i) / v(0);
  }
  for (const cplx& r : roots) est.toas.push_back(detail::toa_from_root(r, tau));
  std::sort(est.toas.begin(), est.toas.end());
  return est;
}

/// Block-ESPRIT in the total-least-squares sense: the K-dimensional signal
/// subspace is read off the right singular vectors of the stacked data
/// matrix; the one-bin shift between its first and last L-1 rows is the
/// rotation whose eigenvalue arguments encode the ToAs.
inline SupportEstimate block_esprit_tls(const DataMatrix& H, int K, double tau) {
  require(K >= 1, "block_esprit_tls: K must be >= 1");
  require(H.L >= K + 1, "block_esprit_tls: need L >= K+1");
  const ComplexMatrix stacked = H.stacked();
  require(stacked.rows() >= K, "block_esprit_tls: not enough rows for K paths");
  const detail::RowSpace space = detail::row_space(stacked);

  SupportEstimate est;
  est.singular_values.assign(space.sigma.data(), space.sigma.data() + space.sigma.size());

  const ComplexMatrix Vs = space.V.leftCols(K);
  const ComplexMatrix Xi0 = Vs.topRows(H.L - 1);
  const ComplexMatrix Xi1 = Vs.bottomRows(H.L - 1);
  const ComplexMatrix Psi = tls_solve(Xi0, Xi1);

  Eigen::ComplexEigenSolver<ComplexMatrix> es(Psi, /*computeEigenvectors=*/false);
  if (es.info() != Eigen::Success)
    throw numerical_error("block_esprit_tls: eigen solver failed");
  std::vector<cplx> roots(es.eigenvalues().data(),
                          es.eigenvalues().data() + es.eigenvalues().size());
  detail::flag_degenerate_roots(est, roots);
  for (const cplx& r : roots) est.toas.push_back(detail::toa_from_root(r, tau));
  std::sort(est.toas.begin(), est.toas.end());
  return est;
}

/// Block-Cadzow denoising: alternate a rank-K truncation of the stacked
/// matrix with per-block diagonal averaging (the projection back onto
/// block-Toeplitz structure). Stops once sigma_{K+1}/sigma_K < tol or after
/// max_iters sweeps; the returned matrix is always exactly block-Toeplitz.
inline DataMatrix block_cadzow(const DataMatrix& H, int K, int max_iters,
                               double tol = 1e-8) {
  require(K >= 1, "block_cadzow: K must be >= 1");
  require(K < std::min(H.L, H.block_rows()), "block_cadzow: K too large for blocks");
  DataMatrix work = H;
  const int P = work.antenna_count();
  const int rows = work.block_rows();

  for (int iter = 0; iter < max_iters; ++iter) {
    ComplexMatrix stacked = work.stacked();
    Eigen::JacobiSVD<ComplexMatrix> svd(stacked,
                                        Eigen::ComputeThinU | Eigen::ComputeThinV);
    const auto& s = svd.singularValues();
    if (s(K - 1) <= 0.0 || s(K) / s(K - 1) < tol) break;
    ComplexMatrix low_rank = svd.matrixU().leftCols(K) *
                             s.head(K).asDiagonal() *
                             svd.matrixV().leftCols(K).adjoint();
    // Project each block back to Toeplitz by averaging its diagonals.
    for (int p = 0; p < P; ++p) {
      ComplexVector sums = ComplexVector::Zero(work.Q);
      RealVector counts = RealVector::Zero(work.Q);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < work.L; ++c) {
          const int i = work.L - 1 + r - c;
          sums(i) += low_rank(p * rows + r, c);
          counts(i) += 1.0;
        }
      ComplexMatrix block(rows, work.L);
      for (int r = 0; r < rows; ++r)
        for (int c = 0; c < work.L; ++c) {
          const int i = work.L - 1 + r - c;
          block(r, c) = sums(i) / counts(i);
        }
      work.blocks[p] = std::move(block);
    }
  }
  return work;
}

/// Least-squares amplitude recovery given the support: one Vandermonde system
/// per antenna, A(i, k) = exp(-2 pi j bins[i] t_k / tau). Throws when the
/// system condition number exceeds 1e12.
inline ComplexMatrix estimate_amplitudes(const std::vector<double>& toas,
                                         const ComplexMatrix& coeffs,
                                         const std::vector<double>& bins,
                                         double tau) {
  const int K = static_cast<int>(toas.size());
  const int Q = static_cast<int>(coeffs.rows());
  const int P = static_cast<int>(coeffs.cols());
  require(K >= 1 && Q >= K, "estimate_amplitudes: need at least K coefficients");
  require(static_cast<int>(bins.size()) == Q, "estimate_amplitudes: bins size mismatch");

  ComplexMatrix A(Q, K);
  for (int i = 0; i < Q; ++i)
    for (int k = 0; k < K; ++k) {
      const double ang = -2.0 * M_PI * bins[i] * toas[k] / tau;
      A(i, k) = cplx(std::cos(ang), std::sin(ang));
    }
  Eigen::JacobiSVD<ComplexMatrix> svd(A, Eigen::ComputeThinU | Eigen::ComputeThinV);
  const auto& s = svd.singularValues();
  if (s(K - 1) <= 0.0 || s(0) / s(K - 1) > 1e12)
    throw numerical_error("estimate_amplitudes: Vandermonde system ill-conditioned");
  ComplexMatrix out(K, P);
  for (int p = 0; p < P; ++p) out.col(p) = svd.solve(coeffs.col(p));
  return out;
}

/// Convenience overload for the regular scattered grid {mD : |m| <= M}.
inline ComplexMatrix estimate_amplitudes(const std::vector<double>& toas,
                                         const ComplexMatrix& coeffs, int D,
                                         double tau) {
  const int Q = static_cast<int>(coeffs.rows());
  require(Q % 2 == 1, "estimate_amplitudes: default grid needs odd row count");
  std::vector<double> bins(Q);
  for (int i = 0; i < Q; ++i) bins[i] = static_cast<double>((i - (Q - 1) / 2) * D);
  return estimate_amplitudes(toas, coeffs, bins, tau);
}

enum class SupportMethod { prony, esprit };

struct ScsFriResult {
  SupportEstimate support;     // ToAs in [0, tau/D) after un-dilation
  ComplexMatrix amplitudes;    // K x P
};

/// Full SCS-FRI pipeline: build the data matrix, optionally Block-Cadzow
/// denoise and read the coefficients back, estimate the common support with
/// the chosen method, divide the ToAs by the pilot dilation D, and recover
/// per-antenna amplitudes from the (denoised) coefficients.
///
/// `bins` optionally names the true carrier grid of the coefficient rows
/// (required for offset grids such as the Walsh-Hadamard layout). It must be
/// an arithmetic progression with step D. `L` is the data-matrix width used
/// for ESPRIT/Cadzow; the default Q/2 gives roughly square blocks.
inline ScsFriResult scs_fri(const ComplexMatrix& coeffs, int K, SupportMethod method,
                            int cadzow_iters, int D, double tau, int L = -1,
                            const std::vector<double>* bins = nullptr) {
  const int Q = static_cast<int>(coeffs.rows());
  require(K >= 1, "scs_fri: K must be >= 1");
  require(D >= 1, "scs_fri: D must be >= 1");
  require(Q >= 2 * K + 1, "scs_fri: need at least 2K+1 coefficients");

  std::vector<double> grid;
  if (bins != nullptr) {
    require(static_cast<int>(bins->size()) == Q, "scs_fri: bins size mismatch");
    for (int i = 1; i < Q; ++i)
      require(std::abs((*bins)[i] - (*bins)[i - 1] - D) < 1e-9,
              "scs_fri: bins must advance by D");
    grid = *bins;
  } else {
    require(Q % 2 == 1, "scs_fri: even coefficient count requires explicit bins");
    grid.resize(Q);
    for (int i = 0; i < Q; ++i) grid[i] = static_cast<double>((i - (Q - 1) / 2) * D);
  }

  if (L <= 0) L = Q / 2;
  L = std::max(L, K + 1);
  require(L <= Q - K, "scs_fri: L leaves fewer than K block rows");

  ComplexMatrix work = coeffs;
  if (cadzow_iters > 0) {
    DataMatrix H = build_data_matrix(coeffs, L);
    H = block_cadzow(H, K, cadzow_iters);
    work = coefficients_from(H);
  }

  SupportEstimate support =
      method == SupportMethod::prony
          ? block_prony_tls(build_data_matrix(work, K + 1), K, tau)
          : block_esprit_tls(build_data_matrix(work, L), K, tau);

  // The coefficient grid advances by D bins per row, so the recovered
  // arguments encode D*t_k; undo the dilation.
  for (double& t : support.toas) t /= D;
  std::sort(support.toas.begin(), support.toas.end());

  ScsFriResult result;
  result.amplitudes = estimate_amplitudes(support.toas, work, grid, tau);
  result.support = std::move(support);
  return result;
}

/// Non-parametric baseline: ideal lowpass (Dirichlet) interpolation of the
/// channel frequency response from scattered pilots. The 2M+1 pilot-domain
/// samples are inverse-transformed to a 2M+1 tap response on the delay window
/// [0, tau/D), then re-evaluated on every carrier of the kernel passband.
/// Rows of the result cover carriers -M_kernel .. M_kernel in ascending
/// order; the interpolant passes exactly through the pilot values.
inline ComplexMatrix lowpass_interpolate(const ComplexMatrix& coeffs,
                                         const PilotLayout& layout,
                                         const KernelConfig& kernel) {
  require(layout.kind == PilotKind::scattered_dft ||
              layout.kind == PilotKind::contiguous_dft,
          "lowpass_interpolate: scattered DFT layout required");
  const int Q = 2 * layout.M + 1;
  require(static_cast<int>(coeffs.rows()) == Q,
          "lowpass_interpolate: coefficient count != 2M+1");
  const int P = static_cast<int>(coeffs.cols());
  const int D = layout.D;
  const int carriers = kernel.coefficient_count();

  // Delay-domain taps: length-Q inverse DFT of the pilot sequence. Tap i sits
  // at delay i * tau / (Q D), covering one alias-free window of length tau/D.
  auto root = [](int num, int den) {
    const double ang = 2.0 * M_PI * num / den;
    return cplx(std::cos(ang), std::sin(ang));
  };
  ComplexMatrix idft(Q, Q);
  for (int i = 0; i < Q; ++i)
    for (int m = 0; m < Q; ++m) idft(i, m) = root(((m - layout.M) * i) % Q, Q);
  ComplexMatrix taps = (idft * coeffs) / static_cast<double>(Q);

  const int QD = Q * D;
  ComplexMatrix basis(carriers, Q);
  for (int row = 0; row < carriers; ++row) {
    const long long carrier = row - kernel.M;
    for (int i = 0; i < Q; ++i)
      basis(row, i) = root(static_cast<int>((-carrier * i) % QD), QD);
  }
  return basis * taps;
}

}  // namespace scsfri
