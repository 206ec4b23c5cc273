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

#include "stftpr/solver.hpp"

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <sstream>

#include "stftpr/fft.hpp"

namespace stftpr {

std::string to_string(StepScaling scaling) {
  switch (scaling) {
    case StepScaling::kAbsolute:
      return "absolute";
    case StepScaling::kInitEnergy:
      return "init-energy";
    case StepScaling::kLocalEnergy:
      return "local-energy";
  }
  return "unknown";
}

double scaled_step(double mu, const Eigen::VectorXcd& x0, int W, StepScaling scaling) {
  if (scaling == StepScaling::kAbsolute) return mu;
  const long N = x0.size();
  double energy = x0.squaredNorm();
  if (scaling == StepScaling::kLocalEnergy && W >= 1 && N > 0) {
    const Eigen::VectorXd power = x0.cwiseAbs2();
    double run = 0.0;
    for (long k = 0; k < std::min<long>(W, N); ++k) run += power[k];
    double peak = run;
    for (long s = 1; s < N; ++s) {
      run += power[(s + W - 1) % N] - power[s - 1];
      peak = std::max(peak, run);
    }
    energy = peak * static_cast<double>(N) / std::min<long>(W, N);
  }
  if (!(energy > 0.0)) throw InvalidInputError("step scaling needs a nonzero start");
  return mu / energy;
}

StepScaling step_scaling_from_string(const std::string& name) {
  if (name == "absolute") return StepScaling::kAbsolute;
  if (name == "init-energy") return StepScaling::kInitEnergy;
  if (name == "local-energy") return StepScaling::kLocalEnergy;
  throw InvalidInputError("unknown step scaling '" + name + "'");
}

std::string to_string(StopReason reason) {
  switch (reason) {
    case StopReason::kMaxIter:
      return "max_iter";
    case StopReason::kStalled:
      return "stalled";
    case StopReason::kZeroLoss:
      return "zero_loss";
    case StopReason::kTargetLoss:
      return "target_loss";
  }
  return "unknown";
}

void GdOptions::validate() const {
  if (!(mu > 0.0) || !std::isfinite(mu)) throw InvalidInputError("step size mu must be > 0");
  if (max_iter < 1) throw InvalidInputError("max_iter must be >= 1");
  if (B && !(*B > 0.0)) throw InvalidInputError("threshold B must be > 0");
  if (stop_tol < 0.0) throw InvalidInputError("stop_tol must be >= 0");
  if (stop_window < 1) throw InvalidInputError("stop_window must be >= 1");
  if (relative_target < 0.0) throw InvalidInputError("relative_target must be >= 0");
  if (!(divergence_factor > 1.0)) throw InvalidInputError("divergence_factor must be > 1");
}

void GlaOptions::validate() const {
  if (max_iter < 1) throw InvalidInputError("max_iter must be >= 1");
  if (stop_tol < 0.0) throw InvalidInputError("stop_tol must be >= 0");
  if (stop_window < 1) throw InvalidInputError("stop_window must be >= 1");
}

// ---------------------------------------------------------------------------
// Loss and gradient

namespace {

void check_shapes(const MeasurementSet& Y, const ProblemConfig& cfg, long length) {
  cfg.validate();
  if (Y.N() != cfg.N || Y.frames() != cfg.frames()) {
    throw DimensionError("measurement shape does not match the configuration");
  }
  if (length != cfg.N) {
    throw DimensionError("signal length " + std::to_string(length) +
                         " does not match N=" + std::to_string(cfg.N));
  }
}

}  // namespace

LossEvaluator::LossEvaluator(const MeasurementSet& Y, const ProblemConfig& cfg)
    : N_(cfg.N), real_signal_(cfg.real_signal) {
  check_shapes(Y, cfg, cfg.N);
  const QuadraticTerms quad = quadratic_terms(cfg.window);
  const long N = cfg.N;
  offsets_.push_back(0);
  for (int m = 0; m < cfg.frames(); ++m) {
    const long shift = static_cast<long>(m) * cfg.L;
    for (std::size_t i = 0; i < quad.ells.size(); ++i) {
      const int ell = quad.ells[i];
      for (const auto& tap : quad.taps[i]) {
        const long p = wrap_index(shift - tap.s, N);
        terms_.push_back({static_cast<int>(p), static_cast<int>(wrap_index(p + ell, N)), tap.c});
      }
      offsets_.push_back(terms_.size());
      targets_.push_back(Y.Y(m, wrap_index(ell, N)));
    }
  }
}

double LossEvaluator::data_energy() const {
  double total = 0.0;
  for (const Complex& y : targets_) total += std::norm(y);
  return 0.5 * total;
}

double LossEvaluator::loss(const Eigen::VectorXcd& z) const {
  if (z.size() != N_) throw DimensionError("loss: signal length mismatch");
  double total = 0.0;
  for (std::size_t r = 0; r < targets_.size(); ++r) {
    Complex h = 0.0;
    for (std::size_t t = offsets_[r]; t < offsets_[r + 1]; ++t) {
      const Term& term = terms_[t];
      h += term.c * z[term.p] * std::conj(z[term.q]);
    }
    total += std::norm(h - targets_[r]);
  }
  return 0.5 * total;
}

double LossEvaluator::loss_and_gradient(const Eigen::VectorXcd& z,
                                        Eigen::VectorXcd& grad) const {
  if (z.size() != N_) throw DimensionError("gradient: signal length mismatch");
  if (real_signal_ && z.imag().cwiseAbs().maxCoeff() == 0.0) {
    return real_loss_and_gradient(z, grad);
  }
  grad.setZero(N_);
  double total = 0.0;
  for (std::size_t r = 0; r < targets_.size(); ++r) {
    Complex h = 0.0;
    for (std::size_t t = offsets_[r]; t < offsets_[r + 1]; ++t) {
      const Term& term = terms_[t];
      h += term.c * z[term.p] * std::conj(z[term.q]);
    }
    const Complex res = h - targets_[r];
    total += std::norm(res);
    const Complex res_c = std::conj(res);
    for (std::size_t t = offsets_[r]; t < offsets_[r + 1]; ++t) {
      const Term& term = terms_[t];
      grad[term.q] += res_c * term.c * z[term.p];
      grad[term.p] += res * term.c * z[term.q];
    }
  }
  if (real_signal_) grad = grad.real().cast<Complex>().eval();
  return 0.5 * total;
}

// For real z every h is real; the imaginary parts of the targets only add a
// constant to the loss and drop out of the gradient.
double LossEvaluator::real_loss_and_gradient(const Eigen::VectorXcd& z,
                                             Eigen::VectorXcd& grad) const {
  const Eigen::VectorXd zr = z.real();
  Eigen::VectorXd gr = Eigen::VectorXd::Zero(N_);
  double total = 0.0;
  for (std::size_t r = 0; r < targets_.size(); ++r) {
    double h = 0.0;
    for (std::size_t t = offsets_[r]; t < offsets_[r + 1]; ++t) {
      const Term& term = terms_[t];
      h += term.c * zr[term.p] * zr[term.q];
    }
    const double res = h - targets_[r].real();
    const double im = targets_[r].imag();
    total += res * res + im * im;
    for (std::size_t t = offsets_[r]; t < offsets_[r + 1]; ++t) {
      const Term& term = terms_[t];
      gr[term.q] += res * term.c * zr[term.p];
      gr[term.p] += res * term.c * zr[term.q];
    }
  }
  grad = gr.cast<Complex>();
  return 0.5 * total;
}

double loss(const Signal& z, const MeasurementSet& Y, const ProblemConfig& cfg) {
  check_shapes(Y, cfg, z.length());
  return LossEvaluator(Y, cfg).loss(z.values());
}

Eigen::VectorXcd gradient(const Signal& z, const MeasurementSet& Y, const ProblemConfig& cfg) {
  check_shapes(Y, cfg, z.length());
  Eigen::VectorXcd g;
  LossEvaluator(Y, cfg).loss_and_gradient(z.values(), g);
  return g;
}

Eigen::VectorXcd threshold(const Eigen::VectorXcd& z, double B) {
  if (!(B > 0.0)) throw InvalidInputError("threshold B must be > 0");
  Eigen::VectorXcd out = z;
  for (Eigen::Index i = 0; i < out.size(); ++i) {
    const double mag = std::abs(out[i]);
    if (mag > B) out[i] *= B / mag;
  }
  return out;
}

// ---------------------------------------------------------------------------
// Iteration helpers

namespace {

using Clock = std::chrono::steady_clock;

Signal as_signal(const Eigen::VectorXcd& z, bool real) {
  if (real) return Signal::from_real(z.real());
  return Signal::from_complex(z);
}

// Tracks "relative change below tol for `window` consecutive steps".
class StallDetector {
 public:
  StallDetector(double tol, int window) : tol_(tol), window_(window) {}

  bool update(double previous, double current) {
    const double scale = std::max(std::abs(previous), std::abs(current));
    const double rel = scale > 0.0 ? std::abs(previous - current) / scale : 0.0;
    run_ = rel < tol_ ? run_ + 1 : 0;
    return run_ >= window_;
  }

 private:
  double tol_;
  int window_;
  int run_ = 0;
};

}  // namespace

RecoveryResult gd_recover(const MeasurementSet& Y, const ProblemConfig& cfg, const Signal& x0,
                          const GdOptions& options, const Signal* truth) {
  options.validate();
  check_shapes(Y, cfg, x0.length());
  if (truth && truth->length() != cfg.N) throw DimensionError("truth length mismatch");
  const auto start = Clock::now();

  RecoveryResult result;
  TrialRecord& rec = result.record;
  rec.config = cfg;
  rec.method = Method::kGd;

  const double step = scaled_step(options.mu, x0.values(), cfg.W(), options.scaling);
  result.step = step;

  const LossEvaluator eval(Y, cfg);
  const double target = options.relative_target * eval.data_energy();
  Eigen::VectorXcd z = x0.values();
  if (cfg.real_signal) z = z.real().cast<Complex>();
  if (options.B) z = threshold(z, *options.B);

  Eigen::VectorXcd grad;
  double f = eval.loss_and_gradient(z, grad);
  const double f_start = f;
  if (!std::isfinite(f)) throw DivergenceError("loss is not finite at the start", 0);
  auto record = [&](double value) {
    if (!options.record_trace) return;
    rec.loss_trace.push_back(value);
    if (truth) rec.error_trace.push_back(relative_error(as_signal(z, cfg.real_signal), *truth));
  };
  record(f);

  StallDetector stall(options.stop_tol, options.stop_window);
  int it = 0;
  result.stop = StopReason::kMaxIter;
  if (f == 0.0) {
    result.stop = StopReason::kZeroLoss;
  } else if (f <= target) {
    result.stop = StopReason::kTargetLoss;
  }
  while (result.stop == StopReason::kMaxIter && it < options.max_iter) {
    ++it;
    z -= step * grad;
    if (options.B) z = threshold(z, *options.B);
    const double f_prev = f;
    f = eval.loss_and_gradient(z, grad);
    if (!std::isfinite(f) || f > options.divergence_factor * f_start) {
      std::ostringstream msg;
      msg << "gradient descent diverged at iteration " << it << " (loss " << f
          << ", initial " << f_start << ", step " << step << ")";
      throw DivergenceError(msg.str(), it);
    }
    record(f);
    if (f == 0.0) {
      result.stop = StopReason::kZeroLoss;
    } else if (f <= target) {
      result.stop = StopReason::kTargetLoss;
    } else if (stall.update(f_prev, f)) {
      result.stop = StopReason::kStalled;
    }
  }

  result.estimate = as_signal(z, cfg.real_signal).gauge_fixed();
  result.final_loss = f;
  rec.iterations = it;
  if (truth) rec.error = relative_error(result.estimate, *truth);
  rec.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
  return result;
}

// ---------------------------------------------------------------------------
// Griffin-Lim

RecoveryResult gla_recover(const MeasurementSet& Y, const ProblemConfig& cfg, const Signal& x0,
                           const GlaOptions& options, const Signal* truth) {
  options.validate();
  check_shapes(Y, cfg, x0.length());
  if (truth && truth->length() != cfg.N) throw DimensionError("truth length mismatch");
  const auto start = Clock::now();
  const int N = cfg.N;
  const int frames = cfg.frames();

  Eigen::VectorXd denom = Eigen::VectorXd::Zero(N);
  for (int m = 0; m < frames; ++m) {
    for (int n = 0; n < N; ++n) {
      const double g = cfg.window.at(static_cast<long>(m) * cfg.L - n);
      denom[n] += g * g;
    }
  }
  for (int n = 0; n < N; ++n) {
    if (!(denom[n] > 0.0)) {
      throw InvalidWindowError("window gives zero synthesis weight at n=" +
                               std::to_string(n) + "; Griffin-Lim is undefined");
    }
  }
  const Eigen::MatrixXd target = Y.Z.cwiseMax(0.0).cwiseSqrt();

  RecoveryResult result;
  TrialRecord& rec = result.record;
  rec.config = cfg;
  rec.method = Method::kGla;

  Eigen::VectorXcd z = x0.values();
  if (cfg.real_signal) z = z.real().cast<Complex>();

  auto residual_and_projection = [&](const Eigen::VectorXcd& v, Eigen::MatrixXcd& projected) {
    projected = stft(Signal::from_complex(v), cfg);
    double res = 0.0;
    for (Eigen::Index m = 0; m < projected.rows(); ++m) {
      for (Eigen::Index k = 0; k < projected.cols(); ++k) {
        const Complex c = projected(m, k);
        const double mag = std::abs(c);
        const double diff = mag - target(m, k);
        res += diff * diff;
        projected(m, k) = mag > 0.0 ? c * (target(m, k) / mag) : Complex(target(m, k), 0.0);
      }
    }
    return std::sqrt(res);
  };
  auto record = [&](double value) {
    if (!options.record_trace) return;
    rec.loss_trace.push_back(value);
    if (truth) rec.error_trace.push_back(relative_error(as_signal(z, cfg.real_signal), *truth));
  };

  Eigen::MatrixXcd projected;
  double res = residual_and_projection(z, projected);
  record(res);
  StallDetector stall(options.stop_tol, options.stop_window);
  result.stop = res == 0.0 ? StopReason::kZeroLoss : StopReason::kMaxIter;
  int it = 0;
  Eigen::VectorXcd frame(N);
  while (result.stop == StopReason::kMaxIter && it < options.max_iter) {
    ++it;
    Eigen::VectorXcd next = Eigen::VectorXcd::Zero(N);
    for (int m = 0; m < frames; ++m) {
      frame = fft::inverse(projected.row(m).transpose());
      const long shift = static_cast<long>(m) * cfg.L;
      for (int n = 0; n < N; ++n) next[n] += cfg.window.at(shift - n) * frame[n];
    }
    z = next.cwiseQuotient(denom.cast<Complex>());
    if (cfg.real_signal) z = z.real().cast<Complex>();
    const double res_prev = res;
    res = residual_and_projection(z, projected);
    record(res);
    if (res == 0.0) {
      result.stop = StopReason::kZeroLoss;
    } else if (stall.update(res_prev, res)) {
      result.stop = StopReason::kStalled;
    }
  }

  result.estimate = as_signal(z, cfg.real_signal).gauge_fixed();
  result.final_loss = res;
  rec.iterations = it;
  if (truth) rec.error = relative_error(result.estimate, *truth);
  rec.wall_time = std::chrono::duration<double>(Clock::now() - start).count();
  return result;
}

void write_trace_csv(std::ostream& out, const TrialRecord& record) {
  out << "iter,loss,error\n";
  char buf[64];
  for (std::size_t i = 0; i < record.loss_trace.size(); ++i) {
    out << i << ',';
    std::snprintf(buf, sizeof(buf), "%.17g", record.loss_trace[i]);
    out << buf << ',';
    if (i < record.error_trace.size()) {
      std::snprintf(buf, sizeof(buf), "%.17g", record.error_trace[i]);
      out << buf;
    }
    out << '\n';
  }
}

}  // namespace stftpr
