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
// Monte-Carlo experiment drivers:
//   A: ToA RMSE vs SNR for 1/2/4/8 uncorrelated antennas, two paths 2T apart
//      with a 10:1 amplitude ratio, against the Rayleigh single-path bound.
//   B: separable vs full (Fisher Monte-Carlo) bounds at path separations T
//      and 2T, with and without per-antenna ToA jitter.
//   C: uncoded 4-QAM symbol error rate over a spatially correlated scene for
//      SCS-FRI, per-antenna FRI, lowpass interpolation, and half-pilot
//      SCS-FRI, with per-carrier zero-forcing (MRC) equalization.
//
// Every row carries the base seed and the config hash; per-trial seeds are
// derived by chaining mix_seed over (seed, experiment tag, sweep indices,
// trial), so any row can be reproduced in isolation and results never depend
// on the worker-thread count.

#pragma once

#include <cmath>
#include <cstdint>
#include <cstdio>
#include <numeric>
#include <optional>
#include <sstream>
#include <string>
#include <vector>

#include "scsfri/bounds.hpp"
#include "scsfri/config.hpp"
#include "scsfri/estimator.hpp"
#include "scsfri/parallel.hpp"
#include "scsfri/pilots.hpp"
#include "scsfri/rng.hpp"

namespace scsfri {

// ---------------------------------------------------------------------------
// Result tables (versioned CSV / gnuplot .dat emission)
// ---------------------------------------------------------------------------

inline std::string format_double(double v) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.12g", v);
  return buf;
}

inline std::string format_hash(std::uint64_t h) {
  char buf[20];
  std::snprintf(buf, sizeof(buf), "%016llx", static_cast<unsigned long long>(h));
  return buf;
}

struct ResultTable {
  std::string schema;
  std::vector<std::string> columns;
  std::vector<std::vector<std::string>> rows;

  std::string to_csv() const {
    std::ostringstream out;
    out << "# schema=" << schema << "\n";
    for (std::size_t i = 0; i < columns.size(); ++i)
      out << (i ? "," : "") << columns[i];
    out << "\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? "," : "") << row[i];
      out << "\n";
    }
    return out.str();
  }

  std::string to_dat() const {
    std::ostringstream out;
    out << "# schema=" << schema << "\n#";
    for (const auto& c : columns) out << " " << c;
    out << "\n";
    for (const auto& row : rows) {
      for (std::size_t i = 0; i < row.size(); ++i) out << (i ? " " : "") << row[i];
      out << "\n";
    }
    return out.str();
  }
};

// ---------------------------------------------------------------------------
// Scoring helpers
// ---------------------------------------------------------------------------

inline double circular_distance(double a, double b, double period) {
  return std::abs(std::remainder(a - b, period));
}

struct MatchResult {
  std::vector<int> assignment;  // estimated index matched to each true path
  std::vector<double> errors;   // circular distance per true path
};

/// Minimum-total-circular-distance assignment between true and estimated
/// ToAs, by exhaustion over permutations (estimates come in small counts).
inline MatchResult match_toas(const std::vector<double>& truth,
                              const std::vector<double>& estimated, double period) {
  const int K = static_cast<int>(truth.size());
  require(static_cast<int>(estimated.size()) == K, "match_toas: count mismatch");
  require(K >= 1 && K <= 9, "match_toas: supports 1..9 paths");
  std::vector<int> perm(K), best(K);
  std::iota(perm.begin(), perm.end(), 0);
  double best_total = std::numeric_limits<double>::infinity();
  do {
    double total = 0.0;
    for (int k = 0; k < K; ++k)
      total += circular_distance(truth[k], estimated[perm[k]], period);
    if (total < best_total) {
      best_total = total;
      best = perm;
    }
  } while (std::next_permutation(perm.begin(), perm.end()));
  MatchResult out;
  out.assignment = best;
  out.errors.resize(K);
  for (int k = 0; k < K; ++k)
    out.errors[k] = circular_distance(truth[k], estimated[best[k]], period);
  return out;
}

/// Global input SNR convention: per antenna, E||noiseless samples||^2 /
/// (N sigma^2), averaged over antennas. With unit-variance fading the
/// expected sample energy is (N / (2M+1)) sum_k a_k^2 per antenna, hence:
inline double sigma2_for_global_snr(double snr_db, double amplitude_energy,
                                    const KernelConfig& kern) {
  const double lin = std::pow(10.0, snr_db / 10.0);
  return amplitude_energy / ((2.0 * kern.M + 1.0) * lin);
}

/// Variance of the extracted pilot coefficients z[m] = (2M+1) yhat[mD] for
/// time-domain noise of variance sigma2.
inline double pilot_noise_variance(double sigma2, const KernelConfig& kern) {
  const double gain = 2.0 * kern.M + 1.0;
  return gain * gain * sigma2 / kern.N;
}

/// The pilot-domain problem is an FRI problem in its own right: 2M+1
/// coefficients of a kernel with half-width M (the layout's), delays dilated
/// by D, and an equivalent per-sample noise variance. All bound evaluations
/// for the experiments happen in this model, because the estimators only see
/// the pilots.
struct DilatedModel {
  KernelConfig kernel;
  double sigma2 = 0.0;
  int D = 1;
};

inline DilatedModel dilated_equivalent(const KernelConfig& kern,
                                       const PilotLayout& layout, double sigma2) {
  DilatedModel model;
  model.kernel = KernelConfig(kern.tau, layout.M, 2 * layout.M + 1);
  model.sigma2 = pilot_noise_variance(sigma2, kern) / (2.0 * layout.M + 1.0);
  model.D = layout.D;
  return model;
}

inline std::uint64_t chain_seed(std::uint64_t base,
                                std::initializer_list<std::uint64_t> parts) {
  for (std::uint64_t p : parts) base = mix_seed(base, p);
  return base;
}

/// Breakdown SNR: the largest grid point whose RMSE exceeds `factor` times
/// the bound, or (grid minimum - 5 dB) when the estimator never breaks down
/// on the grid. Inputs aligned and ascending in SNR.
inline double breakdown_snr(const std::vector<double>& snr_db,
                            const std::vector<double>& rmse,
                            const std::vector<double>& crb, double factor = 10.0) {
  double breakdown = snr_db.front() - 5.0;
  for (std::size_t i = 0; i < snr_db.size(); ++i)
    if (rmse[i] > factor * crb[i]) breakdown = std::max(breakdown, snr_db[i]);
  return breakdown;
}

// ---------------------------------------------------------------------------
// Experiment A
// ---------------------------------------------------------------------------

inline ResultTable run_experiment_a(const ExperimentConfig& cfg) {
  require(cfg.exp_a.has_value(), "experiment a: missing experiment_a section");
  require(!cfg.paths.empty(), "experiment a: paths required");
  const KernelConfig& kern = cfg.kernel;
  const PilotLayout& layout = cfg.layout;
  const double tau = kern.tau;
  const int D = layout.D;
  const int K = static_cast<int>(cfg.paths.size());
  const std::vector<double>& snr_grid =
      cfg.exp_a->snr_db.empty() ? cfg.snr_db : cfg.exp_a->snr_db;

  const std::vector<int> bins = pilot_bins(layout, kern);
  const int Q = static_cast<int>(bins.size());
  std::vector<double> truth(K), amps(K);
  double amplitude_energy = 0.0;
  for (int k = 0; k < K; ++k) {
    truth[k] = cfg.paths[k].toa;
    amps[k] = cfg.paths[k].expected_amplitude;
    amplitude_energy += amps[k] * amps[k];
  }
  const double score_period = tau / D;

  // Steering matrix is trial-independent (exact common support, no jitter).
  ComplexMatrix steering(Q, K);
  for (int i = 0; i < Q; ++i)
    for (int k = 0; k < K; ++k) {
      const double ang = -2.0 * M_PI * bins[i] * truth[k] / tau;
      steering(i, k) = cplx(std::cos(ang), std::sin(ang));
    }

  ResultTable table;
  table.schema = "scsfri-experiment-a-v1";
  table.columns = {"P", "snr_db", "path", "rmse", "crb", "trials", "seed", "config_hash"};
  const std::string hash = format_hash(cfg.config_hash());
  const std::string seed_str = std::to_string(cfg.seed);

  for (std::size_t pi = 0; pi < cfg.exp_a->antennas.size(); ++pi) {
    const int P = cfg.exp_a->antennas[pi];
    require(P >= 1, "experiment a: antenna count must be >= 1");
    for (std::size_t s = 0; s < snr_grid.size(); ++s) {
      const double sigma2 = sigma2_for_global_snr(snr_grid[s], amplitude_energy, kern);
      const double bin_sigma = std::sqrt(pilot_noise_variance(sigma2, kern));

      RealMatrix err2 = RealMatrix::Zero(cfg.trials, K);
      RealMatrix inv_z2 = RealMatrix::Zero(cfg.trials, K);
      parallel_trials(cfg.trials, [&](long trial) {
        Rng rng(chain_seed(cfg.seed, {0xA, static_cast<std::uint64_t>(P), s,
                                      static_cast<std::uint64_t>(trial)}));
        ComplexMatrix gains(K, P);
        for (int k = 0; k < K; ++k)
          for (int p = 0; p < P; ++p) gains(k, p) = amps[k] * rng.complex_normal();
        ComplexMatrix z = steering * gains;
        for (int p = 0; p < P; ++p)
          for (int i = 0; i < Q; ++i) z(i, p) += bin_sigma * rng.complex_normal();

        const ScsFriResult res = scs_fri(z, K, cfg.estimator.method,
                                         cfg.estimator.cadzow_iters, D, tau);
        const MatchResult match = match_toas(truth, res.support.toas, score_period);
        for (int k = 0; k < K; ++k) {
          err2(trial, k) = match.errors[k] * match.errors[k];
          inv_z2(trial, k) = 1.0 / std::norm(gains(k, 0) / amps[k]);
        }
      });

      const DilatedModel eq = dilated_equivalent(kern, layout, sigma2);
      for (int k = 0; k < K; ++k) {
        const double rmse = std::sqrt(err2.col(k).mean()) / tau;
        const double ds = dsnr(amps[k], 0.0, eq.sigma2, eq.kernel);
        double bound;  // E[(dt_k)^2], seconds^2
        if (P >= 2) {
          bound = crb_rayleigh_single_path(ComplexMatrix::Identity(P, P), ds,
                                           eq.kernel.N) /
                  (static_cast<double>(D) * D);
        } else {
          // The P = 1 Rayleigh expectation diverges; report the empirical
          // average of the per-realization conditional bound instead.
          bound = inv_z2.col(k).mean() / (2.0 * eq.kernel.N * ds) /
                  (static_cast<double>(D) * D);
        }
        table.rows.push_back({std::to_string(P), format_double(snr_grid[s]),
                              std::to_string(k + 1), format_double(rmse),
                              format_double(std::sqrt(bound) / tau),
                              std::to_string(cfg.trials), seed_str, hash});
      }
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Experiment B
// ---------------------------------------------------------------------------

inline ResultTable run_experiment_b(const ExperimentConfig& cfg) {
  require(cfg.exp_b.has_value(), "experiment b: missing experiment_b section");
  const ExperimentBConfig& exp = *cfg.exp_b;
  const KernelConfig& kern = cfg.kernel;
  const PilotLayout& layout = cfg.layout;
  const double tau = kern.tau;
  const double T = kern.sample_step();
  const int D = layout.D;
  const int P = exp.antennas;
  const int K = 2;
  const std::vector<double>& snr_grid =
      exp.snr_db.empty() ? cfg.snr_db : exp.snr_db;

  const std::vector<int> bins = pilot_bins(layout, kern);
  const int Q = static_cast<int>(bins.size());
  const double amplitude_energy = 2.0 * exp.amplitude * exp.amplitude;
  const double score_period = tau / D;

  ResultTable table;
  table.schema = "scsfri-experiment-b-v1";
  table.columns = {"separation_T", "epsilon_T", "snr_db",   "path",
                   "rmse",         "crb_separable", "crb_full", "crb_full_stderr",
                   "trials",       "seed",      "config_hash"};
  const std::string hash = format_hash(cfg.config_hash());
  const std::string seed_str = std::to_string(cfg.seed);

  for (std::size_t si = 0; si < exp.separations_T.size(); ++si) {
    const double sep = exp.separations_T[si];
    const std::vector<double> truth = {exp.base_toa, exp.base_toa + sep * T};
    require(truth[1] * D < tau, "experiment b: dilated path leaves the period");

    // Reference bounds at unit equivalent noise variance; the Fisher matrix
    // scales exactly as sigma^2, so each SNR point is a rescale.
    const DilatedModel eq_unit = dilated_equivalent(kern, layout, 0.0);
    std::vector<PathSpec> dilated_paths(K);
    for (int k = 0; k < K; ++k) {
      dilated_paths[k].toa = truth[k] * D;
      dilated_paths[k].expected_amplitude = exp.amplitude;
    }
    const CrbReport full_ref =
        crb_monte_carlo({}, dilated_paths, P, 1.0, eq_unit.kernel, exp.fisher_draws,
                        chain_seed(cfg.seed, {0xBF, si}));
    const double ds_unit = dsnr(exp.amplitude, 0.0, 1.0, eq_unit.kernel);
    const double sep_ref =
        crb_rayleigh_single_path(ComplexMatrix::Identity(P, P), ds_unit,
                                 eq_unit.kernel.N);  // seconds^2 per unit sigma'^2

    for (std::size_t ei = 0; ei < exp.epsilons_T.size(); ++ei) {
      const double eps = exp.epsilons_T[ei] * T;
      for (std::size_t s = 0; s < snr_grid.size(); ++s) {
        const double sigma2 =
            sigma2_for_global_snr(snr_grid[s], amplitude_energy, kern);
        const double bin_sigma = std::sqrt(pilot_noise_variance(sigma2, kern));
        const double eq_sigma2 = dilated_equivalent(kern, layout, sigma2).sigma2;

        RealMatrix err2 = RealMatrix::Zero(cfg.trials, K);
        parallel_trials(cfg.trials, [&](long trial) {
          Rng rng(chain_seed(cfg.seed, {0xB, si, ei, s,
                                        static_cast<std::uint64_t>(trial)}));
          ComplexMatrix gains(K, P);
          for (int k = 0; k < K; ++k)
            for (int p = 0; p < P; ++p)
              gains(k, p) = exp.amplitude * rng.complex_normal();
          RealMatrix toas(K, P);
          for (int k = 0; k < K; ++k)
            for (int p = 0; p < P; ++p)
              toas(k, p) = truth[k] + (eps > 0.0 ? rng.uniform(-eps, eps) : 0.0);

          ComplexMatrix z(Q, P);
          for (int p = 0; p < P; ++p)
            for (int i = 0; i < Q; ++i) {
              cplx acc(0.0, 0.0);
              for (int k = 0; k < K; ++k) {
                const double ang = -2.0 * M_PI * bins[i] * toas(k, p) / tau;
                acc += gains(k, p) * cplx(std::cos(ang), std::sin(ang));
              }
              z(i, p) = acc + bin_sigma * rng.complex_normal();
            }

          const ScsFriResult res = scs_fri(z, K, cfg.estimator.method,
                                           cfg.estimator.cadzow_iters, D, tau);
          const MatchResult match = match_toas(truth, res.support.toas, score_period);
          for (int k = 0; k < K; ++k) err2(trial, k) = match.errors[k] * match.errors[k];
        });

        for (int k = 0; k < K; ++k) {
          const double rmse = std::sqrt(err2.col(k).mean()) / tau;
          const double crb_sep =
              sep_ref * eq_sigma2 / (static_cast<double>(D) * D) / (tau * tau);
          const double crb_full =
              full_ref.toa_bounds[k] * eq_sigma2 / (static_cast<double>(D) * D);
          const double crb_full_se =
              full_ref.toa_stderr[k] * eq_sigma2 / (static_cast<double>(D) * D);
          table.rows.push_back(
              {format_double(sep), format_double(exp.epsilons_T[ei]),
               format_double(snr_grid[s]), std::to_string(k + 1),
               format_double(rmse), format_double(std::sqrt(crb_sep)),
               format_double(std::sqrt(crb_full)), format_double(crb_full_se),
               std::to_string(cfg.trials), seed_str, hash});
        }
      }
    }
  }
  return table;
}

// ---------------------------------------------------------------------------
// Experiment C
// ---------------------------------------------------------------------------

namespace detail {

/// Channel frequency response sum_k c_k exp(-2 pi j m t_k / tau) on carriers
/// m = -M .. M, evaluated by phasor recurrence per path.
inline void accumulate_response(ComplexVector& out, int M, double toa, cplx gain,
                                double tau) {
  const double step_ang = -2.0 * M_PI * toa / tau;
  const cplx step(std::cos(step_ang), std::sin(step_ang));
  const double base_ang = 2.0 * M_PI * M * toa / tau;  // carrier -M
  cplx phasor(std::cos(base_ang), std::sin(base_ang));
  for (int row = 0; row < 2 * M + 1; ++row) {
    out(row) += gain * phasor;
    phasor *= step;
  }
}

struct QamSymbol {
  cplx value;
  int bits;  // 2-bit Gray label
};

inline QamSymbol draw_qam(Rng& rng) {
  const int bits = static_cast<int>(rng.next_u64() & 3u);
  const double re = (bits & 1) ? -M_SQRT1_2 : M_SQRT1_2;
  const double im = (bits & 2) ? -M_SQRT1_2 : M_SQRT1_2;
  return {cplx(re, im), bits};
}

inline int decide_qam(cplx x) {
  return (x.real() < 0.0 ? 1 : 0) | (x.imag() < 0.0 ? 2 : 0);
}

}  // namespace detail

inline ResultTable run_experiment_c(const ExperimentConfig& cfg) {
  require(cfg.exp_c.has_value(), "experiment c: missing experiment_c section");
  const ExperimentCConfig& exp = *cfg.exp_c;
  const KernelConfig& kern = cfg.kernel;
  const PilotLayout& layout = cfg.layout;
  const double tau = kern.tau;
  const int D = layout.D;
  require(kern.N == kern.coefficient_count(),
          "experiment c: frame must be critically sampled (N = 2M+1)");

  const ScattererScene& scene = exp.scene;
  const int P = static_cast<int>(scene.antennas.size());
  const std::vector<PathSpec> paths = scene.paths();
  const int K = static_cast<int>(paths.size());
  const std::vector<double>& snr_grid =
      exp.snr_db.empty() ? cfg.snr_db : exp.snr_db;

  std::vector<ComplexMatrix> chol(K);
  for (int k = 0; k < K; ++k)
    chol[k] = cholesky(build_correlation_matrix(scene, k));
  double amplitude_energy = 0.0;
  for (const PathSpec& p : paths)
    amplitude_energy += p.expected_amplitude * p.expected_amplitude;

  const std::vector<int> pilot_idx = pilot_bins(layout, kern);
  const int Q = static_cast<int>(pilot_idx.size());
  std::vector<char> is_pilot(kern.N, 0);
  for (int b : pilot_idx) is_pilot[b + kern.M] = 1;
  std::vector<int> data_rows;
  for (int row = 0; row < kern.N; ++row)
    if (!is_pilot[row]) data_rows.push_back(row);
  const int data_count = static_cast<int>(data_rows.size());

  // Half-pilot variant: keep the pilots with the smallest |carrier|, positive
  // index first on ties. The selection is always a consecutive run in m.
  std::vector<int> half_m;
  {
    std::vector<int> order;
    for (int m = -layout.M; m <= layout.M; ++m) order.push_back(m);
    std::sort(order.begin(), order.end(), [](int a, int b) {
      if (std::abs(a) != std::abs(b)) return std::abs(a) < std::abs(b);
      return a > b;
    });
    order.resize(std::min<std::size_t>(order.size(), exp.half_pilot_count));
    half_m.assign(order.begin(), order.end());
    std::sort(half_m.begin(), half_m.end());
  }
  std::vector<double> half_bins(half_m.size());
  for (std::size_t i = 0; i < half_m.size(); ++i)
    half_bins[i] = static_cast<double>(half_m[i] * D);

  const char* method_names[4] = {"scs-fri", "fri-independent", "lowpass",
                                 "scs-fri-half-pilots"};

  ResultTable table;
  table.schema = "scsfri-experiment-c-v1";
  table.columns = {"method", "snr_db", "ser",  "errors",
                   "symbols", "trials", "seed", "config_hash"};
  const std::string hash = format_hash(cfg.config_hash());
  const std::string seed_str = std::to_string(cfg.seed);

  for (std::size_t s = 0; s < snr_grid.size(); ++s) {
    const double sigma2 = sigma2_for_global_snr(snr_grid[s], amplitude_energy, kern);
    const double carrier_sigma = std::sqrt(kern.N * sigma2);

    Eigen::Matrix<long, Eigen::Dynamic, 4> errors(cfg.trials, 4);
    errors.setZero();
    parallel_trials(cfg.trials, [&](long trial) {
      Rng rng(chain_seed(cfg.seed, {0xC, s, static_cast<std::uint64_t>(trial)}));

      // Fading, jitter, payload, noise: drawn in a fixed order.
      ComplexMatrix gains(K, P);
      for (int k = 0; k < K; ++k) {
        ComplexVector r(P);
        for (int p = 0; p < P; ++p) r(p) = rng.complex_normal();
        gains.row(k) =
            (paths[k].expected_amplitude * (chol[k] * r)).transpose();
      }
      RealMatrix toas(K, P);
      for (int k = 0; k < K; ++k)
        for (int p = 0; p < P; ++p)
          toas(k, p) =
              paths[k].toa + (exp.epsilon > 0.0 ? rng.uniform(-exp.epsilon, exp.epsilon) : 0.0);

      std::vector<int> tx_bits(kern.N, 0);
      ComplexVector tx = ComplexVector::Ones(kern.N);
      for (int row : data_rows) {
        const detail::QamSymbol sym = detail::draw_qam(rng);
        tx(row) = sym.value;
        tx_bits[row] = sym.bits;
      }

      ComplexMatrix G = ComplexMatrix::Zero(kern.N, P);
      for (int p = 0; p < P; ++p) {
        ComplexVector col = ComplexVector::Zero(kern.N);
        for (int k = 0; k < K; ++k)
          detail::accumulate_response(col, kern.M, toas(k, p), gains(k, p), tau);
        G.col(p) = col;
      }
      ComplexMatrix Y(kern.N, P);
      for (int p = 0; p < P; ++p)
        for (int row = 0; row < kern.N; ++row)
          Y(row, p) = tx(row) * G(row, p) + carrier_sigma * rng.complex_normal();

      // Pilot observations (pilot symbols are all-ones).
      ComplexMatrix z(Q, P);
      for (int i = 0; i < Q; ++i) z.row(i) = Y.row(pilot_idx[i] + kern.M);

      // Channel estimates per method.
      ComplexMatrix estimates[4];
      bool failed[4] = {false, false, false, false};

      auto fri_response = [&](const std::vector<double>& toa_list,
                              const ComplexMatrix& amp) {
        const int cols = static_cast<int>(amp.cols());
        ComplexMatrix Ghat = ComplexMatrix::Zero(kern.N, cols);
        for (int p = 0; p < cols; ++p) {
          ComplexVector col = ComplexVector::Zero(kern.N);
          for (std::size_t k = 0; k < toa_list.size(); ++k)
            detail::accumulate_response(col, kern.M, toa_list[k],
                                        amp(static_cast<int>(k), p), tau);
          Ghat.col(p) = col;
        }
        return Ghat;
      };

      try {
        const ScsFriResult res = scs_fri(z, K, cfg.estimator.method,
                                         cfg.estimator.cadzow_iters, D, tau);
        estimates[0] = fri_response(res.support.toas, res.amplitudes);
      } catch (const numerical_error&) {
        failed[0] = true;
      }
      try {
        ComplexMatrix Ghat(kern.N, P);
        for (int p = 0; p < P; ++p) {
          const ScsFriResult res =
              scs_fri(z.col(p), K, cfg.estimator.method, cfg.estimator.cadzow_iters,
                      D, tau);
          Ghat.col(p) = fri_response(res.support.toas, res.amplitudes).col(0);
        }
        estimates[1] = Ghat;
      } catch (const numerical_error&) {
        failed[1] = true;
      }
      try {
        estimates[2] = lowpass_interpolate(z, layout, kern);
      } catch (const numerical_error&) {
        failed[2] = true;
      }
      try {
        ComplexMatrix z_half(static_cast<int>(half_m.size()), P);
        for (std::size_t i = 0; i < half_m.size(); ++i)
          z_half.row(static_cast<int>(i)) = z.row(half_m[i] + layout.M);
        const ScsFriResult res =
            scs_fri(z_half, K, cfg.estimator.method, cfg.estimator.cadzow_iters, D,
                    tau, -1, &half_bins);
        estimates[3] = fri_response(res.support.toas, res.amplitudes);
      } catch (const numerical_error&) {
        failed[3] = true;
      }

      // Zero-forcing (maximum-ratio) per-carrier equalization and hard 4-QAM
      // decisions. A failed channel estimate scores every symbol in error.
      for (int method = 0; method < 4; ++method) {
        if (failed[method]) {
          errors(trial, method) = data_count;
          continue;
        }
        long err = 0;
        for (int row : data_rows) {
          cplx num(0.0, 0.0);
          double den = 0.0;
          for (int p = 0; p < P; ++p) {
            num += std::conj(estimates[method](row, p)) * Y(row, p);
            den += std::norm(estimates[method](row, p));
          }
          const cplx decision_stat = den > 0.0 ? num / den : cplx(0.0, 0.0);
          if (detail::decide_qam(decision_stat) != tx_bits[row]) ++err;
        }
        errors(trial, method) = err;
      }
    });

    for (int method = 0; method < 4; ++method) {
      long total_errors = 0;
      for (long trial = 0; trial < cfg.trials; ++trial)
        total_errors += errors(trial, method);
      const long total_symbols = static_cast<long>(data_count) * cfg.trials;
      table.rows.push_back(
          {method_names[method], format_double(snr_grid[s]),
           format_double(static_cast<double>(total_errors) / total_symbols),
           std::to_string(total_errors), std::to_string(total_symbols),
           std::to_string(cfg.trials), seed_str, hash});
    }
  }
  return table;
}

}  // namespace scsfri
