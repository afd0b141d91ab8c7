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
// Synthetic multipath channel with sparse common support across receive
// antennas: periodic Dirichlet pulse shaping, Rayleigh path gains with a
// scatterer-driven spatial correlation across antennas, optional per-antenna
// ToA jitter, and noisy sample generation.

#pragma once

#include <cmath>
#include <cstdint>
#include <optional>
#include <vector>

#include "scsfri/numerics.hpp"
#include "scsfri/rng.hpp"
#include "scsfri/types.hpp"

namespace scsfri {

/// Periodic bandlimited sampling setup: signal period tau, two-sided
/// bandwidth B = (2M+1)/tau, N samples per period at step T = tau/N.
struct KernelConfig {
  double tau = 0.0;
  int M = 0;
  int N = 0;

  KernelConfig() = default;
  KernelConfig(double tau_, int M_, int N_) : tau(tau_), M(M_), N(N_) {
    require(tau > 0.0 && std::isfinite(tau), "KernelConfig: tau must be positive");
    require(M >= 1, "KernelConfig: M must be >= 1");
    require(N >= 2 * M + 1, "KernelConfig: need N >= 2M+1");
  }

  /// Validates that B*tau is an odd integer 2M+1 within floating-point slack.
  static KernelConfig from_bandwidth(double tau, double bandwidth, int N) {
    const double bt = bandwidth * tau;
    const int M = static_cast<int>(std::lround((bt - 1.0) / 2.0));
    require(std::abs(2.0 * M + 1.0 - bt) < 1e-6 * std::max(1.0, bt),
            "KernelConfig: B*tau must equal an odd integer 2M+1");
    return KernelConfig(tau, M, N);
  }

  double bandwidth() const { return (2.0 * M + 1.0) / tau; }
  double sample_step() const { return tau / N; }
  int coefficient_count() const { return 2 * M + 1; }
};

/// tau-periodic sinc: sin(pi B t) / (B tau sin(pi t / tau)), with the
/// removable singularities at t = 0 mod tau evaluated by a series expansion.
inline double dirichlet_kernel(double t, const KernelConfig& cfg) {
  const double a = 2.0 * cfg.M + 1.0;
  const double r = std::remainder(t, cfg.tau);  // [-tau/2, tau/2]
  const double x = r / cfg.tau;
  if (std::abs(x) < 1e-9) {
    return 1.0 - (2.0 * M_PI * M_PI / 3.0) * cfg.M * (cfg.M + 1.0) * x * x;
  }
  const double u = M_PI * x;
  return std::sin(a * u) / (a * std::sin(u));
}

/// Analytic derivative of dirichlet_kernel. Odd function; exactly 0 at
/// t = 0 mod tau.
inline double dirichlet_derivative(double t, const KernelConfig& cfg) {
  const double a = 2.0 * cfg.M + 1.0;
  const double r = std::remainder(t, cfg.tau);
  const double x = r / cfg.tau;
  if (std::abs(x) < 1e-9) {
    return -(4.0 * M_PI * M_PI / (3.0 * cfg.tau)) * cfg.M * (cfg.M + 1.0) * x;
  }
  const double u = M_PI * x;
  const double s = std::sin(u);
  return (M_PI / cfg.tau) *
         (a * std::cos(a * u) * s - std::sin(a * u) * std::cos(u)) /
         (a * s * s);
}

/// One propagation path: time of arrival within [0, tau) and the expected
/// (root-mean-square) gain magnitude. `scatterer` optionally names the scene
/// scatterer that drives this path's antenna correlation; -1 = uncorrelated.
struct PathSpec {
  double toa = 0.0;
  double expected_amplitude = 1.0;
  int scatterer = -1;
};

struct Scatterer {
  double azimuth = 0.0;  // radians
  double kappa = 0.0;    // angular concentration of the reflection density
  PathSpec path;
};

/// Planar receive geometry plus the scatterers that generate the paths.
struct ScattererScene {
  double carrier_omega = 0.0;  // rad/s
  double wave_speed = 299792458.0;
  std::vector<Eigen::Vector2d> antennas;
  std::vector<Scatterer> scatterers;

  double pair_distance(int m, int n) const {
    return (antennas.at(n) - antennas.at(m)).norm();
  }

  /// Azimuth of the normal to the antenna segment (m, n); the normal is the
  /// counter-clockwise rotation of the m->n direction. This fixes the sign
  /// convention for the correlation series and is covered by tests.
  double pair_normal_azimuth(int m, int n) const {
    const Eigen::Vector2d u = antennas.at(n) - antennas.at(m);
    return std::atan2(u.x(), -u.y());
  }

  /// Paths in scatterer order, with back-references attached.
  std::vector<PathSpec> paths() const {
    std::vector<PathSpec> out;
    out.reserve(scatterers.size());
    for (std::size_t k = 0; k < scatterers.size(); ++k) {
      PathSpec p = scatterers[k].path;
      p.scatterer = static_cast<int>(k);
      out.push_back(p);
    }
    return out;
  }
};

/// Angular concentration kappa of a scatterer at distance `distance` with
/// Gaussian girth `width`, solving (1 - exp(-3k/4)) k = (distance/width)^2.
/// The left-hand side is strictly increasing, so plain bisection suffices.
inline double kappa_from_geometry(double distance, double width) {
  require(distance > 0.0 && width > 0.0, "kappa_from_geometry: positive inputs");
  const double target = (distance / width) * (distance / width);
  if (target == 0.0) return 0.0;
  auto g = [](double k) { return (1.0 - std::exp(-0.75 * k)) * k; };
  double lo = 0.0, hi = std::max(1.0, target);
  while (g(hi) < target) hi *= 2.0;
  for (int i = 0; i < 200; ++i) {
    const double mid = 0.5 * (lo + hi);
    (g(mid) < target ? lo : hi) = mid;
    if (hi - lo <= 1e-10 * hi) break;
  }
  return 0.5 * (lo + hi);
}

namespace detail {
inline double std_normal_pdf(double x) {
  return std::exp(-0.5 * x * x) / std::sqrt(2.0 * M_PI);
}
inline double std_normal_cdf(double x) { return 0.5 * std::erfc(-x * M_SQRT1_2); }
}  // namespace detail

/// Closed-form azimuthal reflection density of a Gaussian scatterer with
/// squared apparent aspect kappa_prime = (distance/width)^2, as seen from the
/// receiver. Integrates to 1 over (-pi, pi].
inline double azimuthal_density(double theta, double kappa_prime) {
  require(kappa_prime >= 0.0, "azimuthal_density: kappa_prime must be >= 0");
  const double rk = std::sqrt(kappa_prime);
  const double s = rk * std::sin(theta);
  const double c = rk * std::cos(theta);
  return detail::std_normal_pdf(s) *
         (c * detail::std_normal_cdf(c) + detail::std_normal_pdf(c));
}

/// Von-Mises density exp(kappa cos(theta)) / (2 pi I0(kappa)).
inline double von_mises_pdf(double theta, double kappa) {
  require(kappa >= 0.0, "von_mises_pdf: kappa must be >= 0");
  // Scaled form keeps the ratio finite for concentrations up to ~700.
  const double i0_scaled = std::exp(-kappa) * bessel_i(0, kappa);
  return std::exp(kappa * (std::cos(theta) - 1.0)) / (2.0 * M_PI * i0_scaled);
}

/// Cross-correlation E[Z_{k,m} Z_{k,n}^*] of the path-k fading coefficients
/// at antennas m and n: Jacobi-Anger series
///   J0(x) + 2 sum_l j^l (I_l(kappa)/I0(kappa)) J_l(x) cos[l(theta_k -
///   theta_{m,n} - pi/2)],   x = omega_c d_{m,n} / c.
/// The series is truncated adaptively once the term envelope drops below
/// 1e-12, with a hard cap given by `terms`.
inline cplx spatial_correlation(const ScattererScene& scene, int k, int m, int n,
                                int terms = 60) {
  require(terms >= 1, "spatial_correlation: terms must be >= 1");
  require(k >= 0 && k < static_cast<int>(scene.scatterers.size()),
          "spatial_correlation: scatterer index out of range");
  if (m == n) return cplx(1.0, 0.0);
  const double d = scene.pair_distance(m, n);
  const double x = scene.carrier_omega * d / scene.wave_speed;
  const double kappa = scene.scatterers[k].kappa;
  const double phase0 =
      scene.scatterers[k].azimuth - scene.pair_normal_azimuth(m, n) - M_PI / 2.0;

  const double i0 = bessel_i(0, kappa);
  cplx acc(bessel_j(0, x), 0.0);
  static const cplx j_pow[4] = {cplx(1, 0), cplx(0, 1), cplx(-1, 0), cplx(0, -1)};
  for (int l = 1; l <= terms; ++l) {
    const double ratio = bessel_i(l, kappa) / i0;
    const double jl = bessel_j(l, x);
    acc += 2.0 * j_pow[l & 3] * ratio * jl * std::cos(l * phase0);
    // I_l/I0 decreases in l; J_l decays monotonically once l exceeds x.
    if (l >= x && 2.0 * ratio * std::abs(jl) < 1e-12) break;
  }
  return acc;
}

/// P x P Hermitian correlation matrix of path k across all antennas, with
/// unit diagonal. A smallest eigenvalue in [-1e-10, 0) is clipped to zero;
/// anything below -1e-10 means the series truncation was too short and is
/// reported as an error.
inline ComplexMatrix build_correlation_matrix(const ScattererScene& scene, int k,
                                              int terms = 60) {
  const int P = static_cast<int>(scene.antennas.size());
  require(P >= 1, "build_correlation_matrix: need at least one antenna");
  ComplexMatrix R = ComplexMatrix::Identity(P, P);
  for (int m = 0; m < P; ++m)
    for (int n = m + 1; n < P; ++n) {
      R(m, n) = spatial_correlation(scene, k, m, n, terms);
      R(n, m) = std::conj(R(m, n));
    }
  Eigen::SelfAdjointEigenSolver<ComplexMatrix> eig(R);
  const double min_eig = eig.eigenvalues().minCoeff();
  if (min_eig < -1e-10)
    throw numerical_error(
        "build_correlation_matrix: not PSD, increase series terms");
  if (min_eig < 0.0) {
    RealVector clipped = eig.eigenvalues().cwiseMax(0.0);
    R = eig.eigenvectors() * clipped.asDiagonal() * eig.eigenvectors().adjoint();
  }
  return R;
}

/// One draw of the multipath channel: per-antenna gains (K x P) and per-
/// antenna ToAs (K x P). With epsilon = 0 every antenna shares the path ToA
/// exactly; otherwise each ToA is perturbed by an independent U[-eps, eps].
struct ChannelRealization {
  KernelConfig kernel;
  RealMatrix toas;      // K x P
  ComplexMatrix gains;  // K x P
  double epsilon = 0.0;
  std::uint64_t seed = 0;

  int path_count() const { return static_cast<int>(gains.rows()); }
  int antenna_count() const { return static_cast<int>(gains.cols()); }
};

/// Draws path gains c_{k,p} = a_k Z_{k,p} with Z_k = L_k r (r iid standard
/// complex normal, L_k the Cholesky factor of the scene correlation matrix,
/// identity when the path has no scatterer) and per-antenna ToA jitter.
/// Deterministic for a given seed.
inline ChannelRealization sample_channel(const KernelConfig& kernel,
                                         const std::vector<PathSpec>& paths,
                                         int antennas,
                                         const ScattererScene* scene,
                                         double epsilon, std::uint64_t seed) {
  const int K = static_cast<int>(paths.size());
  require(K >= 1, "sample_channel: need at least one path");
  require(antennas >= 1, "sample_channel: need at least one antenna");
  require(epsilon >= 0.0, "sample_channel: epsilon must be >= 0");
  if (scene != nullptr)
    require(static_cast<int>(scene->antennas.size()) == antennas,
            "sample_channel: antenna count does not match scene");
  for (const PathSpec& p : paths) {
    require(p.toa >= 0.0 && p.toa < kernel.tau, "sample_channel: toa outside [0, tau)");
    require(p.expected_amplitude >= 0.0, "sample_channel: negative amplitude");
  }
  for (int i = 0; i < K; ++i)
    for (int j = i + 1; j < K; ++j) {
      const double gap = std::abs(std::remainder(paths[i].toa - paths[j].toa, kernel.tau));
      require(gap > 1e-12 * kernel.tau, "sample_channel: duplicate ToAs");
    }

  ChannelRealization real;
  real.kernel = kernel;
  real.epsilon = epsilon;
  real.seed = seed;
  real.toas.resize(K, antennas);
  real.gains.resize(K, antennas);

  Rng rng(seed);
  for (int k = 0; k < K; ++k) {
    ComplexVector r(antennas);
    for (int p = 0; p < antennas; ++p) r(p) = rng.complex_normal();
    ComplexVector z;
    if (scene != nullptr && paths[k].scatterer >= 0) {
      const ComplexMatrix L =
          cholesky(build_correlation_matrix(*scene, paths[k].scatterer));
      z = L * r;
    } else {
      z = r;
    }
    for (int p = 0; p < antennas; ++p) {
      real.gains(k, p) = paths[k].expected_amplitude * z(p);
      real.toas(k, p) = paths[k].toa;
    }
    if (epsilon > 0.0)
      for (int p = 0; p < antennas; ++p)
        real.toas(k, p) += rng.uniform(-epsilon, epsilon);
  }
  return real;
}

/// N x P noisy samples y_p[n] = sum_k c_{k,p} phi(nT - t_{k,p}) + q_p[n]
/// with q circularly-symmetric complex Gaussian of total variance sigma2
/// (sigma2/2 per real component).
inline ComplexMatrix sample_received(const ChannelRealization& real, double sigma2,
                                     std::uint64_t seed) {
  require(sigma2 >= 0.0, "sample_received: sigma2 must be >= 0");
  const KernelConfig& k = real.kernel;
  const int K = real.path_count();
  const int P = real.antenna_count();
  ComplexMatrix y = ComplexMatrix::Zero(k.N, P);
  for (int p = 0; p < P; ++p)
    for (int n = 0; n < k.N; ++n) {
      cplx acc(0.0, 0.0);
      for (int kk = 0; kk < K; ++kk)
        acc += real.gains(kk, p) *
               dirichlet_kernel(n * k.sample_step() - real.toas(kk, p), k);
      y(n, p) = acc;
    }
  if (sigma2 > 0.0) {
    Rng rng(seed);
    const double s = std::sqrt(sigma2);
    for (int p = 0; p < P; ++p)
      for (int n = 0; n < k.N; ++n) y(n, p) += s * rng.complex_normal();
  }
  return y;
}

}  // namespace scsfri
