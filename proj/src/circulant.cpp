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

#include "stftpr/circulant.hpp"

#include "stftpr/fft.hpp"
#include "stftpr/model.hpp"

namespace stftpr {

CirculantOperator::CirculantOperator(Eigen::VectorXcd first_column)
    : first_column_(std::move(first_column)) {
  if (first_column_.size() == 0) throw InvalidInputError("empty circulant");
  spectrum_ = fft::forward(first_column_);
}

CirculantOperator::CirculantOperator(const Eigen::VectorXd& first_column)
    : CirculantOperator(Eigen::VectorXcd(first_column.cast<Complex>())) {}

Eigen::VectorXcd CirculantOperator::apply(const Eigen::VectorXcd& v) const {
  if (v.size() != first_column_.size()) {
    throw DimensionError("circulant apply: length mismatch");
  }
  return fft::inverse(spectrum_.cwiseProduct(fft::forward(v)));
}

Eigen::VectorXcd CirculantOperator::pinv_solve(const Eigen::VectorXcd& y,
                                               double tol) const {
  if (y.size() != first_column_.size()) {
    throw DimensionError("circulant pinv_solve: length mismatch");
  }
  if (tol < 0.0) throw InvalidInputError("pinv_solve: tol must be >= 0");
  const double cutoff = tol * spectrum_.cwiseAbs().maxCoeff();
  Eigen::VectorXcd Y = fft::forward(y);
  for (Eigen::Index k = 0; k < Y.size(); ++k) {
    const double mag = std::abs(spectrum_[k]);
    if (mag > cutoff && mag > 0.0) {
      Y[k] *= std::conj(spectrum_[k]) / (mag * mag);
    } else {
      Y[k] = 0.0;
    }
  }
  return fft::inverse(Y);
}

double CirculantOperator::relative_min_modulus() const {
  const Eigen::VectorXd mags = spectrum_.cwiseAbs();
  const double top = mags.maxCoeff();
  if (top == 0.0) return 0.0;
  return mags.minCoeff() / top;
}

}  // namespace stftpr
