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
// The measurement operator. Conventions (all indices mod N):
//
//   X[m,k] = sum_n x[n] g[mL - n] e^{-2 pi j k n / N}
//   Z[m,k] = |X[m,k]|^2
//   Y[m,l] = (1/N) sum_k Z[m,k] e^{-2 pi j k l / N}
//          = sum_n x[n] conj(x[n+l]) g[mL-n] g[mL-n-l]
//
// The l-th circular diagonal of X = x x^* is diag(X, l)[i] = x[i] conj(x[i+l]),
// so column l of Y is G_l diag(X, l) with G_l[m, n] = c_l[mL - n] and
// c_l[n] = g[n] g[n - l].

#ifndef STFTPR_FORWARD_HPP_
#define STFTPR_FORWARD_HPP_

#include <Eigen/Dense>

#include <vector>

#include "stftpr/circulant.hpp"
#include "stftpr/model.hpp"

namespace stftpr {

inline long wrap_index(long idx, long n) {
  long r = idx % n;
  return r < 0 ? r + n : r;
}

Eigen::MatrixXcd stft(const Signal& x, const ProblemConfig& cfg);

MeasurementSet measure(const Signal& x, const ProblemConfig& cfg);

Eigen::MatrixXcd transform_y(const Eigen::MatrixXd& Z);

/// z^* H_{m,l} z with H_{m,l} = P_{-l} D_{mL} D_{mL-l}. O(N), nothing
/// materialized.
Complex apply_h(const Eigen::VectorXcd& z, int m, int ell, const ProblemConfig& cfg);
Complex apply_h(const Signal& z, int m, int ell, const ProblemConfig& cfg);

/// Linear system y_l = G_l diag(X, l) for one diagonal.
struct DiagonalSystem {
  int ell = 0;
  int L = 1;
  int rows = 0;
  Eigen::VectorXd first_column;  // c_l[n] = g[n] g[n - l]
  Eigen::VectorXcd spectrum;     // DFT(first_column)

  /// G_l v, length `rows`.
  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;
  /// The full-overlap (L = 1) circulant with the same first column.
  CirculantOperator circulant() const;
};

DiagonalSystem diagonal_system(int ell, const ProblemConfig& cfg);

/// First column c_l of every diagonal system, without a config.
Eigen::VectorXd diagonal_first_column(const WindowSpec& window, int ell);

struct AdmissibilityReport {
  bool admissible = false;
  double min_modulus = 0.0;           // smallest |DFT(c_l)[k]| over l, k
  double worst_relative_margin = 0.0; // min over l of min|s_l| / max|s_l|
  int worst_ell = 0;
};

/// Checks that DFT(g o P_{-l} g) has no entry with modulus at or below
/// tol * max|DFT| for every |l| <= W - 1.
AdmissibilityReport is_admissible(const WindowSpec& window, int W, double tol = 1e-9);
AdmissibilityReport is_admissible(const WindowSpec& window, double tol = 1e-9);

/// Admissibility restricted to the listed diagonals.
AdmissibilityReport is_admissible_at(const WindowSpec& window,
                                     const std::vector<int>& ells, double tol = 1e-9);

/// Nonzero products g[s] g[s - l] for every l in [-(W-1), W-1]. The
/// quadratic form z^* H_{m,l} z equals
///   sum over (s, c) of c * z[mL - s] * conj(z[mL - s + l]).
/// Loss and gradient evaluations iterate over these lists, costing
/// O(frames * W^2) per pass instead of O(frames * W * N).
struct QuadraticTerms {
  struct Tap {
    int s;
    double c;
  };
  int W = 0;
  std::vector<int> ells;                // -(W-1) .. W-1
  std::vector<std::vector<Tap>> taps;   // parallel to ells
};

QuadraticTerms quadratic_terms(const WindowSpec& window);

}  // namespace stftpr

#endif  // STFTPR_FORWARD_HPP_
