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

#include <sstream>

#include "doctest.h"
#include "oracles.hpp"
#include "stftpr/forward.hpp"
#include "stftpr/init.hpp"
#include "stftpr/solver.hpp"

using namespace stftpr;

namespace {

ProblemConfig rect_config(int N, int W, int L, bool real = false) {
  ProblemConfig cfg;
  cfg.N = N;
  cfg.window = WindowSpec::rectangular(N, W);
  cfg.L = L;
  cfg.real_signal = real;
  cfg.validate();
  return cfg;
}

Signal random_signal(int n, bool real, std::uint64_t seed) {
  Rng rng(seed);
  return random_gaussian_signal(n, real, rng);
}

}  // namespace

TEST_CASE("loss vanishes at the truth and under a global phase") {
  const ProblemConfig cfg = rect_config(12, 5, 2);
  const Signal x = random_signal(12, false, 1);
  const MeasurementSet Y = measure(x, cfg);
  CHECK(loss(x, Y, cfg) < 1e-20);
  CHECK(loss(x.rotated(0.7), Y, cfg) < 1e-20);
  CHECK(gradient(x, Y, cfg).norm() < 1e-10);
}

TEST_CASE("loss matches the dense quadratic-form oracle") {
  for (const ProblemConfig& cfg : {rect_config(10, 4, 1), rect_config(12, 5, 3)}) {
    const Signal x = random_signal(cfg.N, false, 2);
    const Signal z = random_signal(cfg.N, false, 3);
    const MeasurementSet Y = measure(x, cfg);
    const double ref = oracle::loss(z.values(), Y.Y, cfg.window.values, cfg.W(), cfg.L);
    CHECK(loss(z, Y, cfg) == doctest::Approx(ref).epsilon(1e-10));
    CHECK(LossEvaluator(Y, cfg).data_energy() ==
          doctest::Approx(oracle::loss(Eigen::VectorXcd::Zero(cfg.N), Y.Y, cfg.window.values,
                                       cfg.W(), cfg.L))
              .epsilon(1e-12));
  }
}

TEST_CASE("gradient agrees with finite differences") {
  // df = Re<grad, dz> for complex perturbations.
  for (bool real : {false, true}) {
    ProblemConfig cfg;
    cfg.N = 11;
    cfg.window = WindowSpec::gaussian(11, 1.3);
    cfg.L = 1;
    cfg.real_signal = real;
    const MeasurementSet Y = measure(random_signal(11, real, 4), cfg);
    const Eigen::VectorXcd z = random_signal(11, real, 5).values();
    const LossEvaluator eval(Y, cfg);
    Eigen::VectorXcd g;
    eval.loss_and_gradient(z, g);
    const double h = 1e-6;
    for (int n = 0; n < 11; ++n) {
      for (Complex dir : {Complex(1.0, 0.0), Complex(0.0, 1.0)}) {
        if (real && dir.imag() != 0.0) continue;
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(11);
        e[n] = dir;
        const double fd = (eval.loss(z + h * e) - eval.loss(z - h * e)) / (2.0 * h);
        const double an = (std::conj(g[n]) * dir).real();
        CHECK(std::abs(fd - an) <= 1e-5 * (1.0 + std::abs(an)));
      }
    }
    if (real) CHECK(g.imag().norm() == 0.0);
  }
}

TEST_CASE("gradient descent leaves the truth fixed") {
  const ProblemConfig cfg = rect_config(15, 5, 1);
  const Signal x = random_signal(15, false, 6);
  GdOptions o;
  o.max_iter = 50;
  const RecoveryResult r = gd_recover(measure(x, cfg), cfg, x, o, &x);
  CHECK(r.record.error < 1e-12);
  CHECK(r.final_loss < 1e-20);
}

TEST_CASE("gradient descent improves on the init for the noisy example") {
  const ProblemConfig cfg = rect_config(23, 7, 1);
  const Signal x = random_signal(23, false, 7);
  const MeasurementSet Y = add_noise(measure(x, cfg), 20.0, 8);
  const Signal x0 = ls_init(Y, cfg).estimate;
  const RecoveryResult r = gd_recover(Y, cfg, x0, {}, &x);
  CHECK(r.record.error < relative_error(x0, x));
  CHECK(r.record.loss_trace.back() < r.record.loss_trace.front());
  CHECK(r.record.error_trace.size() == r.record.loss_trace.size());
}

TEST_CASE("gradient descent recovers a noiseless signal") {
  const ProblemConfig cfg = rect_config(23, 7, 1);
  const Signal x = random_signal(23, false, 9);
  const MeasurementSet Y = measure(x, cfg);
  GdOptions o;
  o.relative_target = 1e-24;
  const RecoveryResult r = gd_recover(Y, cfg, ls_init(Y, cfg).estimate, o, &x);
  CHECK(r.record.error < 1e-4);
}

TEST_CASE("threshold") {
  Eigen::VectorXcd z(3);
  z << Complex(3.0, 4.0), Complex(0.1, 0.0), Complex(0.0, -2.0);
  const Eigen::VectorXcd t = threshold(z, 1.0);
  CHECK(std::abs(t[0] - Complex(0.6, 0.8)) < 1e-15);
  CHECK(t[1] == z[1]);
  CHECK(std::abs(t[2] - Complex(0.0, -1.0)) < 1e-15);
  CHECK_THROWS_AS(threshold(z, 0.0), InvalidInputError);

  const ProblemConfig cfg = rect_config(9, 3, 1);
  const Signal x = random_signal(9, false, 10);
  GdOptions o;
  o.B = 0.5;
  o.max_iter = 20;
  const RecoveryResult r = gd_recover(measure(x, cfg), cfg, random_signal(9, false, 11), o);
  CHECK(r.estimate.values().cwiseAbs().maxCoeff() <= 0.5 + 1e-12);
}

TEST_CASE("Griffin-Lim fixed point and monotone residual") {
  const ProblemConfig cfg = rect_config(16, 8, 2);
  const Signal x = random_signal(16, false, 12);
  const RecoveryResult fixed = gla_recover(measure(x, cfg), cfg, x, {}, &x);
  CHECK(fixed.record.error < 1e-10);
  CHECK(fixed.final_loss < 1e-10);

  for (std::uint64_t s = 0; s < 20; ++s) {
    const Signal xs = random_signal(16, false, 100 + s);
    GlaOptions o;
    o.max_iter = 200;
    const RecoveryResult r =
        gla_recover(measure(xs, cfg), cfg, random_signal(16, false, 200 + s), o);
    const std::vector<double>& tr = r.record.loss_trace;
    for (std::size_t i = 1; i < tr.size(); ++i) {
      CHECK(tr[i] <= tr[i - 1] * (1.0 + 1e-12) + 1e-14);
    }
  }
}

TEST_CASE("divergence is reported") {
  const ProblemConfig cfg = rect_config(11, 4, 1);
  const Signal x = random_signal(11, false, 13);
  GdOptions o;
  o.mu = 1e3;
  o.scaling = StepScaling::kAbsolute;
  try {
    gd_recover(measure(x, cfg), cfg, x.scaled(1.5), o);
    FAIL("expected divergence");
  } catch (const DivergenceError& e) {
    CHECK(e.iteration() >= 1);
  }
}

TEST_CASE("options validation") {
  GdOptions o;
  o.mu = 0.0;
  CHECK_THROWS_AS(o.validate(), InvalidInputError);
  GdOptions b;
  b.B = -1.0;
  CHECK_THROWS_AS(b.validate(), InvalidInputError);
  const ProblemConfig cfg = rect_config(9, 3, 1);
  CHECK_THROWS_AS(gd_recover(measure(random_signal(9, false, 1), cfg), cfg,
                             random_signal(8, false, 2)),
                  DimensionError);
}

TEST_CASE("trace CSV") {
  TrialRecord rec;
  rec.loss_trace = {2.0, 1.0, 0.5};
  rec.error_trace = {0.3, 0.2, 0.1};
  std::ostringstream out;
  write_trace_csv(out, rec);
  CHECK(out.str() == "iter,loss,error\n0,2,0.29999999999999999\n1,1,0.20000000000000001\n"
                     "2,0.5,0.10000000000000001\n");
}

TEST_CASE("step scaling") {
  const Eigen::VectorXcd flat = Eigen::VectorXcd::Constant(12, Complex(0.5, 0.0));
  const double absolute = scaled_step(0.1, flat, 4, StepScaling::kAbsolute);
  const double energy = scaled_step(0.1, flat, 4, StepScaling::kInitEnergy);
  const double local = scaled_step(0.1, flat, 4, StepScaling::kLocalEnergy);
  CHECK(absolute == 0.1);
  CHECK(energy == doctest::Approx(0.1 / 3.0));
  CHECK(local == doctest::Approx(energy));

  Eigen::VectorXcd peaky = Eigen::VectorXcd::Zero(12);
  peaky[11] = 1.0;
  peaky[0] = 1.0;
  CHECK(scaled_step(1.0, peaky, 4, StepScaling::kLocalEnergy) == doctest::Approx(4.0 / (12.0 * 2.0)));
  CHECK_THROWS_AS(scaled_step(1.0, Eigen::VectorXcd::Zero(4), 2, StepScaling::kInitEnergy),
                  InvalidInputError);
  for (StepScaling s : {StepScaling::kAbsolute, StepScaling::kInitEnergy, StepScaling::kLocalEnergy}) {
    CHECK(step_scaling_from_string(to_string(s)) == s);
  }
}
