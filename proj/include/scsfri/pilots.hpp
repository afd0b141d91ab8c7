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
// Pilot-layout algebra: contiguous and uniformly scattered DFT pilots (OFDM),
// the Walsh-Hadamard <-> DFT pilot subspace mapping (CDMA downlink), and
// extraction of baseband channel DFT coefficients from received samples.
//
// DFT convention used throughout: y_hat[m] = (1/N) sum_n y[n] W_N^{mn} with
// W_N = exp(-2 pi j / N), symmetric carrier indices m in {-N/2 .. N/2-1}
// stored at bin (m mod N).

#pragma once

#include <cmath>
#include <string>
#include <vector>

#include "scsfri/channel.hpp"
#include "scsfri/types.hpp"

namespace scsfri {

enum class PilotKind { contiguous_dft, scattered_dft, wht };

struct PilotLayout {
  PilotKind kind = PilotKind::contiguous_dft;
  int M = 0;                // baseband half-width (pilot count = 2M+1)
  int D = 1;                // pilot gap; 1 for contiguous
  int wht_n = 0;            // transform size 2^n (wht only)
  int wht_ell = 0;          // pilot block exponent (wht only)
  double delay_spread = 0;  // Delta in seconds; 0 disables the aliasing check

  static PilotLayout contiguous(int M) {
    PilotLayout l;
    l.kind = PilotKind::contiguous_dft;
    l.M = M;
    l.D = 1;
    return l;
  }
  static PilotLayout scattered(int M, int D, double delay_spread = 0.0) {
    PilotLayout l;
    l.kind = PilotKind::scattered_dft;
    l.M = M;
    l.D = D;
    l.delay_spread = delay_spread;
    return l;
  }
  static PilotLayout walsh(int n, int ell, double delay_spread = 0.0) {
    require(n >= 2 && n <= 12, "PilotLayout: wht size exponent out of range");
    require(ell >= 1 && ell <= n - 1, "PilotLayout: need 1 <= ell <= n-1");
    PilotLayout l;
    l.kind = PilotKind::wht;
    l.wht_n = n;
    l.wht_ell = ell;
    l.D = 1 << (n - ell);
    l.M = 0;
    l.delay_spread = delay_spread;
    return l;
  }

  int pilot_count() const {
    return kind == PilotKind::wht ? (1 << wht_ell) : 2 * M + 1;
  }
};

/// Scattered pilot indices {mD : |m| <= M}. Fails when the gap D aliases the
/// delay spread (D >= tau/Delta) or runs outside the kernel passband.
inline std::vector<int> scattered_indices(const PilotLayout& layout,
                                          const KernelConfig& kernel) {
  require(layout.kind == PilotKind::scattered_dft ||
              layout.kind == PilotKind::contiguous_dft,
          "scattered_indices: DFT layout required");
  require(layout.M >= 1 && layout.D >= 1, "scattered_indices: bad layout");
  if (layout.delay_spread > 0.0 && layout.D * layout.delay_spread >= kernel.tau)
    throw input_error("scattered_indices: pilot gap aliases the delay spread");
  require(layout.M * layout.D <= kernel.M,
          "scattered_indices: pilots outside the kernel passband");
  std::vector<int> idx;
  idx.reserve(2 * layout.M + 1);
  for (int m = -layout.M; m <= layout.M; ++m) idx.push_back(m * layout.D);
  return idx;
}

/// Orthonormal 2^n x 2^n Walsh-Hadamard matrix, Sylvester (natural) order.
inline RealMatrix sylvester_wht_real(int n) {
  require(n >= 1 && n <= 12, "sylvester_wht: need 1 <= n <= 12");
  RealMatrix S(1, 1);
  S(0, 0) = 1.0;
  for (int i = 0; i < n; ++i) {
    RealMatrix next(2 * S.rows(), 2 * S.cols());
    next << S, S, S, -S;
    S = std::move(next) * M_SQRT1_2;
  }
  return S;
}

inline ComplexMatrix sylvester_wht(int n) {
  return sylvester_wht_real(n).cast<cplx>();
}

/// Index mapping between a contiguous Walsh-Hadamard pilot block and the
/// uniformly scattered DFT pilots spanning the same subspace. Both lists are
/// 1-based column indices: wht = {2^ell + i}, dft = {(i - 1/2) 2^{n-ell} + 1},
/// for i = 1 .. 2^ell. The span equality itself is exercised by tests.
struct WhtDftMap {
  std::vector<int> wht_indices;
  std::vector<int> dft_indices;
};

inline WhtDftMap wht_dft_pilot_map(int n, int ell) {
  require(n >= 2 && n <= 12, "wht_dft_pilot_map: n out of range");
  require(ell >= 1 && ell <= n - 1, "wht_dft_pilot_map: need 1 <= ell <= n-1");
  WhtDftMap map;
  const int count = 1 << ell;
  const int gap = 1 << (n - ell);
  for (int i = 1; i <= count; ++i) {
    map.wht_indices.push_back(count + i);
    map.dft_indices.push_back((2 * i - 1) * gap / 2 + 1);
  }
  return map;
}

/// Symmetric carrier indices of the extracted coefficient rows, ascending.
/// DFT layouts give {mD : |m| <= M}; the Walsh-Hadamard layout gives the
/// half-offset grid {(m + 1/2) D : m = -2^{ell-1} .. 2^{ell-1}-1}. Both are
/// consecutive multiples-of-D grids, which is all the estimator requires.
inline std::vector<int> pilot_bins(const PilotLayout& layout,
                                   const KernelConfig& kernel) {
  std::vector<int> bins;
  if (layout.kind == PilotKind::wht) {
    const int N = 1 << layout.wht_n;
    require(kernel.N == N, "pilot_bins: kernel N must equal 2^n");
    const int half = 1 << (layout.wht_ell - 1);
    for (int m = -half; m < half; ++m) bins.push_back(m * layout.D + layout.D / 2);
    require(std::abs(bins.front()) <= kernel.M && std::abs(bins.back()) <= kernel.M,
            "pilot_bins: wht pilots outside the kernel passband");
  } else {
    bins = scattered_indices(layout, kernel);
  }
  return bins;
}

namespace detail {

// Exact unit-root table: W_N^r for r = 0..N-1. Indexing (bin*n mod N) avoids
// accumulating rotation error over long sums.
inline std::vector<cplx> dft_root_table(int N) {
  std::vector<cplx> w(N);
  for (int r = 0; r < N; ++r) {
    const double ang = -2.0 * M_PI * r / N;
    w[r] = cplx(std::cos(ang), std::sin(ang));
  }
  return w;
}

inline ComplexVector dft_bin(const ComplexMatrix& samples, int column, int bin,
                             const std::vector<cplx>& roots) {
  const int N = static_cast<int>(samples.rows());
  cplx acc(0.0, 0.0);
  for (int n = 0; n < N; ++n) {
    const long long r = (static_cast<long long>(bin) * n) % N;
    acc += samples(n, column) * roots[static_cast<int>((r + N) % N)];
  }
  ComplexVector out(1);
  out(0) = acc / static_cast<double>(N);
  return out;
}

}  // namespace detail

/// Extracts baseband channel DFT coefficients from N x P received samples.
///
/// DFT layouts: per antenna, take the normalized DFT at the pilot bins and
/// divide by the kernel passband gain 1/(2M+1) (pilot symbols are all-ones).
/// The result obeys z_p[m] = sum_k c_{k,p} W^{bin(m) t_k} + noise on the grid
/// reported by pilot_bins().
///
/// Walsh-Hadamard layouts follow the subspace route: transform to the WHT
/// domain, keep the pilot block, then change basis to the equivalent DFT
/// pilots. This equals direct DFT selection at the mapped bins identically,
/// which is exactly the subspace-equality property tests pin down.
inline ComplexMatrix extract_channel_dft(const ComplexMatrix& samples,
                                         const PilotLayout& layout,
                                         const KernelConfig& kernel) {
  require(samples.rows() == kernel.N, "extract_channel_dft: sample count != N");
  require(samples.cols() >= 1, "extract_channel_dft: no antennas");
  const int N = kernel.N;
  const int P = static_cast<int>(samples.cols());
  const std::vector<int> bins = pilot_bins(layout, kernel);
  for (int b : bins)
    require(std::abs(b) <= kernel.M && 2 * std::abs(b) < N + 1,
            "extract_channel_dft: pilot bin outside Nyquist range");
  const double passband_gain = 1.0 / (2.0 * kernel.M + 1.0);
  const int Q = static_cast<int>(bins.size());
  ComplexMatrix out(Q, P);

  const std::vector<cplx> roots = detail::dft_root_table(N);
  if (layout.kind != PilotKind::wht) {
    for (int p = 0; p < P; ++p)
      for (int i = 0; i < Q; ++i)
        out(i, p) = detail::dft_bin(samples, p, bins[i], roots)(0) / passband_gain;
    return out;
  }

  // WHT route. Selected codeword projections, then the unitary basis change
  // onto the mapped DFT pilots.
  const RealMatrix S = sylvester_wht_real(layout.wht_n);
  const WhtDftMap map = wht_dft_pilot_map(layout.wht_n, layout.wht_ell);
  const int Qw = static_cast<int>(map.wht_indices.size());
  require(Qw == Q, "extract_channel_dft: internal wht size mismatch");

  // Change-of-basis: row i of B maps WHT projections to the normalized DFT
  // coefficient at symmetric bin bins[i].
  ComplexMatrix B(Q, Qw);
  for (int i = 0; i < Q; ++i)
    for (int q = 0; q < Qw; ++q) {
      const int col = map.wht_indices[q] - 1;
      cplx acc(0.0, 0.0);
      for (int n = 0; n < N; ++n) {
        const long long r = (static_cast<long long>(bins[i]) * n) % N;
        acc += S(n, col) * roots[static_cast<int>((r + N) % N)];
      }
      B(i, q) = acc / static_cast<double>(N);
    }

  for (int p = 0; p < P; ++p) {
    ComplexVector w_sel(Qw);
    for (int q = 0; q < Qw; ++q) {
      const int col = map.wht_indices[q] - 1;
      cplx acc(0.0, 0.0);
      for (int n = 0; n < N; ++n) acc += S(n, col) * samples(n, p);
      w_sel(q) = acc;
    }
    out.col(p) = (B * w_sel) / passband_gain;
  }
  return out;
}

}  // namespace scsfri
