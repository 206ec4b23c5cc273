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

#ifndef STFTPR_CIRCULANT_HPP_
#define STFTPR_CIRCULANT_HPP_

#include <Eigen/Dense>

namespace stftpr {

inline constexpr double kDefaultSingularTol = 1e-9;

/// Circulant matrix C[i, j] = c[(i - j) mod N] held by its first column c and
/// the cached DFT of c (its eigenvalues). Immutable after construction.
class CirculantOperator {
 public:
  explicit CirculantOperator(Eigen::VectorXcd first_column);
  explicit CirculantOperator(const Eigen::VectorXd& first_column);

  int size() const { return static_cast<int>(first_column_.size()); }
  const Eigen::VectorXcd& first_column() const { return first_column_; }
  const Eigen::VectorXcd& spectrum() const { return spectrum_; }

  /// C v in O(N log N).
  Eigen::VectorXcd apply(const Eigen::VectorXcd& v) const;

  /// Moore-Penrose solve C^+ y. Eigenvalues with modulus at or below
  /// tol * max|spectrum| are treated as zero.
  Eigen::VectorXcd pinv_solve(const Eigen::VectorXcd& y,
                              double tol = kDefaultSingularTol) const;

  /// Smallest eigenvalue modulus relative to the largest (0 for C = 0).
  double relative_min_modulus() const;

 private:
  Eigen::VectorXcd first_column_;
  Eigen::VectorXcd spectrum_;
};

}  // namespace stftpr

#endif  // STFTPR_CIRCULANT_HPP_
