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
// Refinement stage: the quartic least-squares loss on the data Y, its
// gradient, gradient descent with optional amplitude thresholding, and a
// Griffin-Lim baseline working on the intensities Z.
//
//   f(z) = 1/2 sum_m sum_{|l| <= W-1} |z^* H_{m,l} z - Y[m,l]|^2
//
// Gradient convention: the returned g satisfies df = Re<g, dz> for every
// perturbation dz, where <a, b> = sum conj(a[n]) b[n]. With residuals
// r = z^* H z - Y this gives
//
//   g = sum_{m,l} conj(r_{m,l}) H_{m,l} z + r_{m,l} H_{m,l}^T z,
//
// which for real z is sum r (H + H^T) z, the usual real gradient.

#ifndef STFTPR_SOLVER_HPP_
#define STFTPR_SOLVER_HPP_

#include <Eigen/Dense>

#include <optional>
#include <ostream>
#include <string>
#include <vector>

#include "stftpr/forward.hpp"
#include "stftpr/model.hpp"

namespace stftpr {

// How the nominal step mu is turned into the step actually taken.
enum class StepScaling {
  kAbsolute,        // step = mu
  kInitEnergy,      // step = mu / ||x0||^2
  kLocalEnergy,     // step = mu / ((N/W) max_s sum_{k<W} |x0[s+k]|^2)
};

std::string to_string(StepScaling scaling);
StepScaling step_scaling_from_string(const std::string& name);

/// Step actually taken for nominal mu from start x0 and window length W. The
/// local-energy form equals the init-energy one for flat x0 and shrinks the
/// step when the energy is concentrated inside one window.
double scaled_step(double mu, const Eigen::VectorXcd& x0, int W, StepScaling scaling);

struct GdOptions {
  double mu = 5e-3;
  int max_iter = 100000;
  std::optional<double> B;  // per-entry modulus bound
  double stop_tol = 1e-12;  // relative loss change
  int stop_window = 10;     // consecutive iterations below stop_tol
  // Stop once loss <= relative_target * loss(0); 0 disables the test.
  double relative_target = 0.0;
  bool record_trace = true;
  StepScaling scaling = StepScaling::kLocalEnergy;
  double divergence_factor = 1e6;

  void validate() const;
};

enum class StopReason { kMaxIter, kStalled, kZeroLoss, kTargetLoss };

std::string to_string(StopReason reason);

struct RecoveryResult {
  Signal estimate;  // gauge-fixed
  TrialRecord record;
  StopReason stop = StopReason::kMaxIter;
  double final_loss = 0.0;
  double step = 0.0;  // step size actually used (GD only)
};

/// Precomputed window products for repeated loss/gradient evaluations.
/// Every (frame, lag) pair owns a run of index pairs (p, q = p + l) with
/// weight g[s] g[s - l], so z^* H z = sum c z[p] conj(z[q]).
class LossEvaluator {
 public:
  LossEvaluator(const MeasurementSet& Y, const ProblemConfig& cfg);

  double loss(const Eigen::VectorXcd& z) const;
  // Loss and gradient in one pass. With a real-signal config the gradient is
  // real and a faster real-arithmetic path is taken when z is real.
  double loss_and_gradient(const Eigen::VectorXcd& z, Eigen::VectorXcd& grad) const;

  // Sum of |Y|^2 over the lags entering the loss; the loss at z = 0.
  double data_energy() const;

 private:
  struct Term {
    int p;
    int q;
    double c;
  };

  double real_loss_and_gradient(const Eigen::VectorXcd& z, Eigen::VectorXcd& grad) const;

  int N_;
  bool real_signal_;
  std::vector<Term> terms_;
  std::vector<std::size_t> offsets_;  // run boundaries, size = targets + 1
  std::vector<Complex> targets_;      // Y[m, l] per run
};

double loss(const Signal& z, const MeasurementSet& Y, const ProblemConfig& cfg);
Eigen::VectorXcd gradient(const Signal& z, const MeasurementSet& Y, const ProblemConfig& cfg);

/// Rescales entries with modulus above B to modulus B, keeping their phase.
Eigen::VectorXcd threshold(const Eigen::VectorXcd& z, double B);

/// Gradient descent from x0. When `truth` is given the record carries the
/// relative error of every iterate and of the final estimate.
RecoveryResult gd_recover(const MeasurementSet& Y, const ProblemConfig& cfg, const Signal& x0,
                          const GdOptions& options = {}, const Signal* truth = nullptr);

struct GlaOptions {
  int max_iter = 5000;
  double stop_tol = 1e-12;  // relative change of the magnitude residual
  int stop_window = 10;
  bool record_trace = true;

  void validate() const;
};

/// Griffin-Lim iteration on the intensities Y.Z. The loss trace holds the
/// magnitude residual || |STFT(z)| - sqrt(max(Z, 0)) ||_F of each iterate.
/// Throws InvalidWindowError when sum_m g^2[mL - n] vanishes for some n.
RecoveryResult gla_recover(const MeasurementSet& Y, const ProblemConfig& cfg, const Signal& x0,
                           const GlaOptions& options = {}, const Signal* truth = nullptr);

/// Writes the trace as CSV with header iter,loss,error. The error column is
/// empty when no truth was supplied.
void write_trace_csv(std::ostream& out, const TrialRecord& record);

}  // namespace stftpr

#endif  // STFTPR_SOLVER_HPP_
