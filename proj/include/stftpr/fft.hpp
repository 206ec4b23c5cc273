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
// Thin FFTW front end. Plans are cached per thread and per length; planner
// calls are serialized because FFTW's planner is not reentrant.

#ifndef STFTPR_FFT_HPP_
#define STFTPR_FFT_HPP_

#include <Eigen/Dense>

namespace stftpr::fft {

// X[k] = sum_n x[n] e^{-2 pi j k n / N}  (unnormalized)
Eigen::VectorXcd forward(const Eigen::VectorXcd& x);

// x[n] = (1/N) sum_k X[k] e^{+2 pi j k n / N}
Eigen::VectorXcd inverse(const Eigen::VectorXcd& X);

}  // namespace stftpr::fft

#endif  // STFTPR_FFT_HPP_
