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

#include <Eigen/QR>

#include <chrono>

#include "doctest.h"
#include "oracles.hpp"
#include "stftpr/circulant.hpp"
#include "stftpr/model.hpp"

using namespace stftpr;

namespace {

Eigen::VectorXcd random_vec(int n, std::uint64_t seed) {
  Rng rng(seed);
  return random_gaussian_signal(n, false, rng).values();
}

Eigen::VectorXcd unit(int n, int k) {
  Eigen::VectorXcd e = Eigen::VectorXcd::Zero(n);
  e[k] = 1.0;
  return e;
}

}  // namespace

TEST_CASE("identity and shift") {
  const CirculantOperator id(unit(6, 0));
  const Eigen::VectorXcd v = random_vec(6, 1);
  CHECK((id.apply(v) - v).norm() < 1e-13);

  const CirculantOperator shift(unit(6, 1));
  const Eigen::VectorXcd s = shift.apply(v);
  for (int i = 0; i < 6; ++i) CHECK(std::abs(s[i] - v[(i + 5) % 6]) < 1e-13);
}

TEST_CASE("apply matches the dense circulant") {
  for (int n : {2, 7, 16, 33}) {
    const Eigen::VectorXcd c = random_vec(n, 10 + n);
    const Eigen::VectorXcd v = random_vec(n, 20 + n);
    const CirculantOperator C(c);
    CHECK((C.apply(v) - oracle::circulant(c) * v).norm() < 1e-10 * (1.0 + v.norm()));
  }
  const Eigen::VectorXd real = random_vec(9, 3).real();
  const CirculantOperator Cr(real);
  CHECK((Cr.first_column().real() - real).norm() == 0.0);
}

TEST_CASE("pseudo-inverse of an invertible circulant") {
  const Eigen::VectorXcd c = random_vec(11, 4);
  const CirculantOperator C(c);
  const Eigen::VectorXcd y = random_vec(11, 5);
  const Eigen::VectorXcd x = C.pinv_solve(y);
  CHECK((oracle::circulant(c) * x - y).norm() < 1e-9);
  CHECK(C.relative_min_modulus() > 0.0);
}

TEST_CASE("all-ones circulant inverts only on the mean") {
  const CirculantOperator C(Eigen::VectorXd(Eigen::VectorXd::Ones(4)));
  CHECK(C.relative_min_modulus() == doctest::Approx(0.0));
  Eigen::VectorXcd y(4);
  y << 4.0, 4.0, 4.0, 4.0;
  const Eigen::VectorXcd x = C.pinv_solve(y);
  for (int i = 0; i < 4; ++i) CHECK(std::abs(x[i] - Complex(1.0)) < 1e-14);

  Eigen::VectorXcd y2(4);
  y2 << 1.0, -1.0, 1.0, -1.0;
  CHECK(C.pinv_solve(y2).norm() < 1e-14);
}

TEST_CASE("pseudo-inverse matches a dense Moore-Penrose solve") {
  // Band mask with zeros in its spectrum (run of 4 ones in length 12).
  Eigen::VectorXcd c = Eigen::VectorXcd::Zero(12);
  c.head(4).setOnes();
  const CirculantOperator C(c);
  const Eigen::VectorXcd y = random_vec(12, 6);
  const Eigen::MatrixXcd dense = oracle::circulant(c);
  const Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXcd> cod(dense);
  const Eigen::VectorXcd ref = cod.pseudoInverse() * y;
  const Eigen::VectorXcd x = C.pinv_solve(y);
  CHECK((x - ref).norm() < 1e-9);

  // C C^+ is the orthogonal projector onto the range.
  const Eigen::VectorXcd p = C.apply(x);
  const Eigen::VectorXcd pp = C.apply(C.pinv_solve(p));
  CHECK((p - pp).norm() < 1e-9);
  CHECK(std::abs((y - p).dot(p)) < 1e-9);
}

TEST_CASE("zero operator") {
  const CirculantOperator Z(Eigen::VectorXcd(Eigen::VectorXcd::Zero(5)));
  CHECK(Z.relative_min_modulus() == 0.0);
  CHECK(Z.pinv_solve(random_vec(5, 7)).norm() == 0.0);
}

TEST_CASE("fast apply beats a dense matvec at large N") {
  const int n = 4096;
  const Eigen::VectorXcd c = random_vec(n, 8);
  const Eigen::VectorXcd v = random_vec(n, 9);
  const CirculantOperator C(c);
  const Eigen::MatrixXcd dense = oracle::circulant(c);

  using clock = std::chrono::steady_clock;
  Eigen::VectorXcd out = C.apply(v);
  const int reps = 20;
  auto t0 = clock::now();
  for (int i = 0; i < reps; ++i) out += C.apply(v);
  const double fast = std::chrono::duration<double>(clock::now() - t0).count() / reps;

  Eigen::VectorXcd ref = dense * v;
  t0 = clock::now();
  for (int i = 0; i < 3; ++i) ref.noalias() = dense * v;
  const double slow = std::chrono::duration<double>(clock::now() - t0).count() / 3;

  CHECK((C.apply(v) - ref).norm() < 1e-8 * v.norm() * c.norm());
  MESSAGE("fft apply " << fast << " s, dense " << slow << " s");
  CHECK(slow >= 20.0 * fast);
}
