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
// Cramer-Rao bound calculators for the multipath model: the deterministic
// single-path bound, the Rayleigh-fading single-path bound for correlated or
// uncorrelated antennas, its scattered-pilot extension, and the conditional
// Fisher information matrix for interacting paths with a Monte-Carlo
// expectation over fading.
//
// Unit conventions are explicit per function: closed-form single-path bounds
// are normalized (delta t / tau)^2; the Rayleigh and Fisher routes work in
// seconds^2 and are normalized by the caller (the experiment harness reports
// everything as (delta t / tau)^2).

#pragma once

#include <cmath>
#include <cstdint>
#include <limits>
#include <vector>

#include "scsfri/channel.hpp"
#include "scsfri/numerics.hpp"
#include "scsfri/parallel.hpp"
#include "scsfri/rng.hpp"
#include "scsfri/types.hpp"

namespace scsfri {

/// Per-parameter lower bounds, normalized: E[(dt_k/tau)^2] and E[(dc/c)^2].
struct CrbReport {
  enum class Regime { deterministic, rayleigh_separable, rayleigh_full };
  std::vector<double> toa_bounds;
  std::vector<double> amp_bounds;
  Regime regime = Regime::deterministic;
  long trials = 0;                  // 0 for closed form
  std::vector<double> toa_stderr;   // standard error of the MC mean, per path
  long skipped = 0;                 // singular Fisher draws dropped
  bool skip_warning = false;        // more than 1% of draws skipped
};

struct SingleDiracBounds {
  double toa;  // E[(dt/tau)^2] lower bound
  double amp;  // E[(dc/c)^2] lower bound
};

/// Deterministic single-path bound for the real-valued single-channel model:
///   (dt/tau)^2 >= 3(2M+1) / (4 pi^2 N M (M+1) PSNR),
///   (dc/c)^2  >= (2M+1) / (N PSNR),          PSNR = c^2 / sigma^2.
inline SingleDiracBounds crb_single_dirac(int M, int N, double psnr) {
  require(M >= 1 && N >= 2 * M + 1, "crb_single_dirac: bad kernel dimensions");
  require(psnr > 0.0, "crb_single_dirac: psnr must be positive");
  const double m = M;
  SingleDiracBounds b;
  b.toa = 3.0 * (2.0 * m + 1.0) / (4.0 * M_PI * M_PI * N * m * (m + 1.0)) / psnr;
  b.amp = (2.0 * m + 1.0) / static_cast<double>(N) / psnr;
  return b;
}

/// Differential SNR |a1|^2 sum_n |phi'(nT - t1)|^2 / (N sigma^2). The sum
/// runs over one full period, so the value does not depend on t1 shifts by
/// multiples of T. Units: 1/seconds^2.
inline double dsnr(double a1, double t1, double sigma2, const KernelConfig& cfg) {
  require(sigma2 > 0.0, "dsnr: sigma2 must be positive");
  double energy = 0.0;
  for (int n = 0; n < cfg.N; ++n) {
    const double d = dirichlet_derivative(n * cfg.sample_step() - t1, cfg);
    energy += d * d;
  }
  return a1 * a1 * energy / (cfg.N * sigma2);
}

/// E[(Z^H Z)^{-1}] for Z = L r with r iid standard complex normal and
/// eigenvalues `lambda` of the covariance L L^H.
///
/// Branches: all-equal eigenvalues have the inverse-chi-square closed form
/// 1/(lambda (P-1)); distinct eigenvalues use the alternating closed form
///   sum_p (-l_p)^{P-1} (ln l_p / l_p) prod_{q != p} (l_q - l_p)^{-1};
/// clustered-but-unequal spectra (min gap < 1e-6 max lambda) would cancel
/// catastrophically there, so they fall back to the exact 1-D integral
/// E[1/S] = int_0^inf prod_p (1 + l_p t)^{-1} dt, compactified to [0, 1).
inline double expected_inverse_quadratic(const std::vector<double>& eigenvalues) {
  const int P = static_cast<int>(eigenvalues.size());
  if (P <= 1)
    throw numerical_error("expected_inverse_quadratic: diverges for P = 1");
  double max_l = 0.0, min_l = std::numeric_limits<double>::infinity();
  for (double l : eigenvalues) {
    require(l > 0.0 && std::isfinite(l),
            "expected_inverse_quadratic: eigenvalues must be positive");
    max_l = std::max(max_l, l);
    min_l = std::min(min_l, l);
  }

  if (max_l - min_l <= 1e-12 * max_l) {
    const double mean = 0.5 * (max_l + min_l);
    return 1.0 / (mean * (P - 1.0));
  }

  double min_gap = std::numeric_limits<double>::infinity();
  for (int i = 0; i < P; ++i)
    for (int j = i + 1; j < P; ++j)
      min_gap = std::min(min_gap, std::abs(eigenvalues[i] - eigenvalues[j]));

  if (min_gap < 1e-6 * max_l) {
    auto integrand = [&](double u) {
      // t = u/(1-u);  dt = du/(1-u)^2;  prod (1+l t)^{-1} = prod (1-u+l u)^{-1} (1-u)^P
      double value = std::pow(1.0 - u, P - 2);
      for (double l : eigenvalues) value /= (1.0 - u) + l * u;
      return value;
    };
    return adaptive_simpson(integrand, 0.0, 1.0, 1e-13);
  }

  double acc = 0.0;
  for (int p = 0; p < P; ++p) {
    const double lp = eigenvalues[p];
    double term = std::pow(-lp, P - 1) * std::log(lp) / lp;
    for (int q = 0; q < P; ++q)
      if (q != p) term /= (eigenvalues[q] - lp);
    acc += term;
  }
  return acc;
}

/// Rayleigh-fading single-path ToA bound E[(dt1)^2] >= E[(Z^H Z)^{-1}] /
/// (2 N dSNR), in seconds^2 (divide by tau^2 for the normalized bound).
inline double crb_rayleigh_single_path(const ComplexMatrix& R1, double dsnr_value,
                                       int N) {
  require(R1.rows() == R1.cols() && R1.rows() >= 2,
          "crb_rayleigh_single_path: need P >= 2");
  require(dsnr_value > 0.0, "crb_rayleigh_single_path: dSNR must be positive");
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(0.5 * (R1 + R1.adjoint()));
  std::vector<double> lambda;
  for (Eigen::Index i = 0; i < eig.eigenvalues().size(); ++i) {
    const double l = eig.eigenvalues()(i);
    require(l > -1e-10, "crb_rayleigh_single_path: covariance not PSD");
    lambda.push_back(std::max(l, 1e-14));
  }
  return expected_inverse_quadratic(lambda) / (2.0 * N * dsnr_value);
}

/// Scattered-pilot bound table: with 2M+1 pilots of gap D and BT = (2M+1)/N,
///   E[(dt1/tau)^2]  >= 3 BT / (4 D^2 pi^2 M (M+1)) * E[ESNR^{-1}],
///   E[(dc_l/c_l)^2] >= BT * E[PSNR_l^{-1}].
/// The expectations of the inverse SNRs are supplied by the caller: closed
/// form via expected_inverse_quadratic under Rayleigh fading, or plain
/// plug-in values in the deterministic regime.
inline CrbReport crb_scattered(int M, int D, double BT_product, double esnr_inv_mean,
                               const std::vector<double>& psnr_inv_means) {
  require(M >= 1 && D >= 1, "crb_scattered: bad layout");
  require(BT_product > 0.0 && esnr_inv_mean > 0.0, "crb_scattered: positive inputs");
  CrbReport report;
  report.regime = CrbReport::Regime::rayleigh_separable;
  const double m = M;
  report.toa_bounds = {3.0 * BT_product /
                       (4.0 * D * D * M_PI * M_PI * m * (m + 1.0)) * esnr_inv_mean};
  for (double p : psnr_inv_means) {
    require(p > 0.0, "crb_scattered: positive inputs");
    report.amp_bounds.push_back(BT_product * p);
  }
  return report;
}

/// Conditional Fisher information for the ToAs with unknown amplitudes:
///   J = 2 sigma^{-2} (Phi'^H P_ker Phi') entrywise* C,
///   C = diag(a) (sum_p Z_p' Z_p'^H) diag(a),
/// where Phi and Phi' sample the kernel and its derivative at the ToAs and
/// P_ker projects onto the orthogonal complement of the columns of Phi.
/// K x K Hermitian PSD; bounds are diag(J^{-1}) in seconds^2.
inline ComplexMatrix fisher_matrix(const std::vector<double>& toas,
                                   const ComplexMatrix& Z, const std::vector<double>& a,
                                   double sigma2, const KernelConfig& cfg) {
  const int K = static_cast<int>(toas.size());
  require(K >= 1, "fisher_matrix: need at least one path");
  require(static_cast<int>(Z.rows()) == K && static_cast<int>(a.size()) == K,
          "fisher_matrix: K mismatch between toas, Z and a");
  require(sigma2 > 0.0, "fisher_matrix: sigma2 must be positive");

  ComplexMatrix Phi(cfg.N, K), dPhi(cfg.N, K);
  for (int n = 0; n < cfg.N; ++n)
    for (int k = 0; k < K; ++k) {
      const double t = n * cfg.sample_step() - toas[k];
      Phi(n, k) = dirichlet_kernel(t, cfg);
      dPhi(n, k) = dirichlet_derivative(t, cfg);
    }

  Eigen::JacobiSVD<ComplexMatrix> svd(Phi, Eigen::ComputeThinU);
  const auto& s = svd.singularValues();
  if (s(K - 1) <= 1e-12 * s(0))
    throw numerical_error("fisher_matrix: coincident paths (Phi rank-deficient)");
  const ComplexMatrix U = svd.matrixU();
  const ComplexMatrix projected = dPhi - U * (U.adjoint() * dPhi);
  const ComplexMatrix G = dPhi.adjoint() * projected;

  RealVector av(K);
  for (int k = 0; k < K; ++k) av(k) = a[k];
  const ComplexMatrix C =
      av.asDiagonal().toDenseMatrix().cast<cplx>() * (Z * Z.adjoint()) *
      av.asDiagonal().toDenseMatrix().cast<cplx>();

  return (2.0 / sigma2) * G.cwiseProduct(C);
}

/// Monte-Carlo expectation of diag(J^{-1}) over Rayleigh fading draws.
/// `correlations` holds one P x P matrix per path (empty = uncorrelated).
/// Draws whose Fisher matrix is numerically singular are skipped and counted;
/// more than 1% skips raises the report's warning flag. Deterministic for a
/// given seed and trial count, independent of threading.
inline CrbReport crb_monte_carlo(const std::vector<ComplexMatrix>& correlations,
                                 const std::vector<PathSpec>& paths, int antennas,
                                 double sigma2, const KernelConfig& cfg, long trials,
                                 std::uint64_t seed) {
  const int K = static_cast<int>(paths.size());
  require(K >= 1, "crb_monte_carlo: need at least one path");
  require(trials >= 100, "crb_monte_carlo: need at least 100 trials");
  require(correlations.empty() || static_cast<int>(correlations.size()) == K,
          "crb_monte_carlo: one correlation matrix per path expected");

  std::vector<ComplexMatrix> chol;
  if (!correlations.empty())
    for (const ComplexMatrix& R : correlations) chol.push_back(cholesky(R));

  std::vector<double> toas(K);
  std::vector<double> a(K);
  for (int k = 0; k < K; ++k) {
    toas[k] = paths[k].toa;
    a[k] = paths[k].expected_amplitude;
  }

  // One slot per draw, filled in parallel, reduced sequentially; results do
  // not depend on the worker count.
  RealMatrix slots = RealMatrix::Zero(trials, K);
  std::vector<char> ok(trials, 0);
  parallel_trials(trials, [&](long trial) {
    Rng rng(mix_seed(seed, static_cast<std::uint64_t>(trial)));
    ComplexMatrix Z(K, antennas);
    for (int k = 0; k < K; ++k) {
      ComplexVector r(antennas);
      for (int p = 0; p < antennas; ++p) r(p) = rng.complex_normal();
      Z.row(k) = (chol.empty() ? r : ComplexVector(chol[k] * r)).transpose();
    }
    const ComplexMatrix J = fisher_matrix(toas, Z, a, sigma2, cfg);
    Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(J);
    const double lmax = eig.eigenvalues().maxCoeff();
    if (eig.eigenvalues().minCoeff() <= 1e-13 * lmax || lmax <= 0.0) return;
    for (int k = 0; k < K; ++k) {
      double diag_inv = 0.0;
      for (int i = 0; i < K; ++i)
        diag_inv += std::norm(eig.eigenvectors()(k, i)) / eig.eigenvalues()(i);
      slots(trial, k) = diag_inv;
    }
    ok[trial] = 1;
  });

  std::vector<double> sum(K, 0.0), sum_sq(K, 0.0);
  long skipped = 0;
  for (long trial = 0; trial < trials; ++trial) {
    if (!ok[trial]) {
      ++skipped;
      continue;
    }
    for (int k = 0; k < K; ++k) {
      sum[k] += slots(trial, k);
      sum_sq[k] += slots(trial, k) * slots(trial, k);
    }
  }

  const long used = trials - skipped;
  if (used <= 1) throw numerical_error("crb_monte_carlo: all draws degenerate");

  CrbReport report;
  report.regime = CrbReport::Regime::rayleigh_full;
  report.trials = used;
  report.skipped = skipped;
  report.skip_warning = skipped * 100 > trials;
  const double tau2 = cfg.tau * cfg.tau;
  for (int k = 0; k < K; ++k) {
    const double mean = sum[k] / used;
    const double var = std::max(0.0, sum_sq[k] / used - mean * mean);
    report.toa_bounds.push_back(mean / tau2);
    report.toa_stderr.push_back(std::sqrt(var / used) / tau2);
  }
  return report;
}

}  // namespace scsfri
