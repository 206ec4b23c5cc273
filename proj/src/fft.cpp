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

#include "stftpr/fft.hpp"

#include <fftw3.h>

#include <complex>
#include <cstring>
#include <map>
#include <memory>
#include <mutex>

namespace stftpr::fft {

namespace {

std::mutex& planner_mutex() {
  static std::mutex m;
  return m;
}

class Plan {
 public:
  Plan(int n, int sign) : n_(n) {
    in_ = fftw_alloc_complex(n);
    out_ = fftw_alloc_complex(n);
    std::lock_guard<std::mutex> lock(planner_mutex());
    plan_ = fftw_plan_dft_1d(n, in_, out_, sign, FFTW_ESTIMATE);
  }
  ~Plan() {
    {
      std::lock_guard<std::mutex> lock(planner_mutex());
      fftw_destroy_plan(plan_);
    }
    fftw_free(in_);
    fftw_free(out_);
  }
  Plan(const Plan&) = delete;
  Plan& operator=(const Plan&) = delete;

  Eigen::VectorXcd run(const Eigen::VectorXcd& x) {
    static_assert(sizeof(std::complex<double>) == sizeof(fftw_complex));
    std::memcpy(in_, x.data(), sizeof(fftw_complex) * n_);
    fftw_execute(plan_);
    Eigen::VectorXcd y(n_);
    std::memcpy(static_cast<void*>(y.data()), out_, sizeof(fftw_complex) * n_);
    return y;
  }

 private:
  int n_;
  fftw_complex* in_;
  fftw_complex* out_;
  fftw_plan plan_;
};

Plan& plan_for(int n, int sign) {
  thread_local std::map<std::pair<int, int>, std::unique_ptr<Plan>> cache;
  auto& slot = cache[{n, sign}];
  if (!slot) slot = std::make_unique<Plan>(n, sign);
  return *slot;
}

}  // namespace

Eigen::VectorXcd forward(const Eigen::VectorXcd& x) {
  if (x.size() == 0) return x;
  return plan_for(static_cast<int>(x.size()), FFTW_FORWARD).run(x);
}

Eigen::VectorXcd inverse(const Eigen::VectorXcd& X) {
  if (X.size() == 0) return X;
  Eigen::VectorXcd y = plan_for(static_cast<int>(X.size()), FFTW_BACKWARD).run(X);
  y /= static_cast<double>(X.size());
  return y;
}

}  // namespace stftpr::fft
