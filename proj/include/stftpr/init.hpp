// Copyright 2026 The stftpr Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.
// -----------------------------------------------------------------------------
//
// Direct recovery and initialization from the frequency-domain data Y.
//
// Every method solves some of the per-diagonal systems y_l = G_l diag(X, l)
// and then reads the signal off the resulting estimate of X = x x^*:
//
//  - ls_init_L1:        all |l| <= W-1, principal eigenvector, scaled by the
//                       energy found on the main diagonal.
//  - ls_init_Lgt1:      as above after upsampling each y_l to full overlap.
//  - unit_modulus_init: only l = 0 and l = +-M; exact for constant-modulus x.
//  - recursive_recovery: l = 0 and l = 1, then x[n] from x[n-1].

#ifndef STFTPR_INIT_HPP_
#define STFTPR_INIT_HPP_

#include <Eigen/Dense>

#include <cstdint>
#include <optional>
#include <vector>

#include "stftpr/circulant.hpp"
#include "stftpr/model.hpp"

namespace stftpr {

/// Dense Hermitian estimate X0 of x x^*, filled diagonal by diagonal.
struct CorrelationApprox {
  Eigen::MatrixXcd X0;
  std::vector<int> populated_diagonals;

  CorrelationApprox() = default;
  explicit CorrelationApprox(int N) : X0(Eigen::MatrixXcd::Zero(N, N)) {}

  int size() const { return static_cast<int>(X0.rows()); }

  /// Writes diag(X0, l) = values and diag(X0, -l) so that X0 stays
  /// Hermitian. For l = 0 only the real part is kept.
  void set_diagonal(int ell, const Eigen::VectorXcd& values);

  /// diag(X0, l)[i] = X0[i, (i + l) mod N].
  Eigen::VectorXcd diagonal(int ell) const;
};

struct PowerIterationOptions {
  double tol = 1e-10;  // on || v_k - v_{k-1} ||
  int max_iter = 5000;
  // Squarings of the shifted matrix tried before the plain iteration; 0
  // gives the textbook method.
  int max_squarings = 24;
  std::uint64_t seed = 0x5eed5eedULL;
};

struct EigenResult {
  Eigen::VectorXcd vector;  // unit norm, largest-modulus entry real positive
  double eigenvalue = 0.0;
  int iterations = 0;
  double residual = 0.0;    // || A v - lambda v ||
};

/// Eigenvector of the largest algebraic eigenvalue of a Hermitian matrix.
/// Power iteration on A + c I with c = ||A||_1 (max absolute column sum),
/// which makes every shifted eigenvalue nonnegative. The iterate is first
/// advanced by repeated squaring of the shifted matrix, then refined by plain
/// steps until successive iterates differ by less than tol. Throws
/// ConvergenceError after max_iter plain steps.
EigenResult principal_eigenvector(const Eigen::MatrixXcd& A,
                                  const PowerIterationOptions& options = {});
EigenResult principal_eigenvector(const CorrelationApprox& approx,
                                  const PowerIterationOptions& options = {});

/// Second-largest algebraic eigenvalue by deflated power iteration. Returns
/// the Rayleigh quotient reached after at most max_iter steps; never throws
/// on slow convergence.
double second_eigenvalue(const Eigen::MatrixXcd& A, const EigenResult& top,
                         const PowerIterationOptions& options = {});

enum class InterpolationKind { kLinear, kCubic, kIdealLowpass };

std::string to_string(InterpolationKind kind);
InterpolationKind interpolation_from_string(const std::string& name);

/// Interpolation kernel h_L applied after zero-stuffing by L.
///
/// linear: triangle 1 - |k|/L on |k| < L.
/// cubic:  Keys cubic convolution (a = -0.5) sampled at k/L on |k| < 2L.
/// ideal:  gain-L brick-wall over N/L consecutive DFT bins starting at
///         band_start (requires L | N).
struct InterpolationFilter {
  InterpolationKind kind = InterpolationKind::kLinear;
  int L = 1;
  Eigen::VectorXd taps;  // taps[k + half_width] = h[k], k in [-half_width, half_width]
  int half_width = 0;
  int N = 0;             // ideal only
  int band_start = 0;    // ideal only

  static InterpolationFilter linear(int L);
  static InterpolationFilter cubic(int L);
  static InterpolationFilter ideal_lowpass(int N, int L, int band_start = 0);
  static InterpolationFilter make(InterpolationKind kind, int L, int N = 0);
};

/// Expansion (y_sub[m] placed at n = mL, zeros elsewhere) followed by
/// circular convolution with the filter. Output length N.
Eigen::VectorXcd upsample_diagonal(const Eigen::VectorXcd& y_sub,
                                   const InterpolationFilter& filter, int N);

struct InitOptions {
  double pinv_tol = kDefaultSingularTol;
  PowerIterationOptions power;
};

struct InitResult {
  Signal estimate;
  double eigenvalue = 0.0;
  double scale = 0.0;  // alpha; sqrt of the positive energy on diag(X0, 0)
  int power_iterations = 0;
  // No positive entry on the main-diagonal solve; estimate is zero.
  bool degenerate = false;
  CorrelationApprox approx;
};

/// Least-squares initialization for full overlap (L = 1).
InitResult ls_init_L1(const MeasurementSet& Y, const ProblemConfig& cfg,
                      const InitOptions& options = {});

/// Least-squares initialization for L > 1 (upsample, then as for L = 1).
InitResult ls_init_Lgt1(const MeasurementSet& Y, const ProblemConfig& cfg,
                        const InterpolationFilter& filter,
                        const InitOptions& options = {});

/// Dispatches on cfg.L.
InitResult ls_init(const MeasurementSet& Y, const ProblemConfig& cfg,
                   InterpolationKind interp = InterpolationKind::kCubic,
                   const InitOptions& options = {});

struct UnitModulusResult {
  Signal estimate;  // unit norm
  double eigenvalue = 0.0;
  double second_eigenvalue = 0.0;
  CorrelationApprox approx;
};

/// Exact recovery of constant-modulus signals from diagonals 0 and +-M.
/// X0 is the Hermitian part of the matrix holding G_0^{-1} y_0 on the main
/// diagonal and G_M^{-1} y_M on diagonal M, so x is an eigenvector with
/// eigenvalue 2/N when |x[n]| = 1/sqrt(N).
UnitModulusResult unit_modulus_init(const MeasurementSet& Y, const ProblemConfig& cfg,
                                    int M, const InitOptions& options = {});

/// Recursive recovery of non-vanishing signals from diagonals 0 and 1.
/// Throws VanishingSignalError (with the offending index) when an entry
/// drops below 1e-6 * sqrt(max diag(X, 0)).
Signal recursive_recovery(const MeasurementSet& Y, const ProblemConfig& cfg,
                          const InitOptions& options = {});

}  // namespace stftpr

#endif  // STFTPR_INIT_HPP_
