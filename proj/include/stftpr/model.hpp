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
// Core value types shared by every module: signals, windows, problem
// configuration, phaseless measurements and trial records. Also hosts the
// global-phase-invariant distance and measurement-noise injection.

#ifndef STFTPR_MODEL_HPP_
#define STFTPR_MODEL_HPP_

#include <Eigen/Dense>

#include <complex>
#include <cstdint>
#include <initializer_list>
#include <limits>
#include <optional>
#include <random>
#include <stdexcept>
#include <string>
#include <vector>

namespace stftpr {

using Complex = std::complex<double>;

// ---------------------------------------------------------------------------
// Errors

class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

class DimensionError : public Error {
 public:
  using Error::Error;
};

class InvalidInputError : public Error {
 public:
  using Error::Error;
};

class InvalidWindowError : public Error {
 public:
  using Error::Error;
};

class ConvergenceError : public Error {
 public:
  ConvergenceError(const std::string& what, double residual)
      : Error(what), residual_(residual) {}
  double residual() const { return residual_; }

 private:
  double residual_;
};

class DivergenceError : public Error {
 public:
  DivergenceError(const std::string& what, int iteration)
      : Error(what), iteration_(iteration) {}
  int iteration() const { return iteration_; }

 private:
  int iteration_;
};

class VanishingSignalError : public Error {
 public:
  VanishingSignalError(const std::string& what, int index)
      : Error(what), index_(index) {}
  int index() const { return index_; }

 private:
  int index_;
};

// ---------------------------------------------------------------------------
// Random numbers
//
// std::mt19937_64 for the bit stream (its output sequence is fixed by the
// standard). Uniform and normal variates are derived here (53-bit mantissa,
// Box-Muller) rather than through <random> distributions, whose output is
// implementation-defined.
class Rng {
 public:
  explicit Rng(std::uint64_t seed) : engine_(seed) {}

  std::uint64_t next_u64() { return engine_(); }
  // Uniform on [0, 1).
  double uniform();
  // Standard normal.
  double normal();
  // +1 or -1 with equal probability.
  double rademacher();

 private:
  std::mt19937_64 engine_;
  std::optional<double> spare_normal_;
};

// Derives an independent stream seed from a base seed and a sequence of
// indices (splitmix64 chaining).
std::uint64_t derive_seed(std::uint64_t base, std::initializer_list<std::uint64_t> indices);

// ---------------------------------------------------------------------------
// Signal

class Signal {
 public:
  Signal() = default;

  static Signal from_complex(Eigen::VectorXcd values);
  static Signal from_real(const Eigen::VectorXd& values);
  static Signal zeros(int length, bool real);

  const Eigen::VectorXcd& values() const { return values_; }
  int length() const { return static_cast<int>(values_.size()); }
  bool is_real() const { return real_; }
  double norm() const { return values_.norm(); }
  Complex operator[](int n) const { return values_[n]; }

  // Real part, valid for either flag.
  Eigen::VectorXd real_values() const { return values_.real(); }

  // Same values multiplied by e^{j phi}; the result is complex unless phi is
  // a multiple of pi.
  Signal rotated(double phi) const;
  Signal scaled(double factor) const;

  // Rotates the signal so that its largest-modulus entry is real and
  // positive. Real signals keep their flag (the rotation is then +-1).
  Signal gauge_fixed() const;

 private:
  Eigen::VectorXcd values_;
  bool real_ = false;
};

// Draws x ~ N(0, I) (real) or x ~ CN(0, I) with unit total variance per
// entry (complex).
Signal random_gaussian_signal(int length, bool real, Rng& rng);

// ---------------------------------------------------------------------------
// Windows

enum class WindowKind { kRectangular, kGaussian, kCustom };

std::string to_string(WindowKind kind);

struct WindowSpec {
  WindowKind kind = WindowKind::kRectangular;
  int W = 0;
  double sigma = 0.0;      // Gaussian only
  Eigen::VectorXd values;  // materialized at ambient length N
  int N = 0;

  // g[n] = 1 on [0, W-1], zero elsewhere.
  static WindowSpec rectangular(int N, int W);
  // g[n] = exp(-n^2 / (2 sigma^2)) on [0, W-1] with W = ceil(3 sigma).
  static WindowSpec gaussian(int N, double sigma);
  // Arbitrary real window; W is one past the last nonzero entry.
  static WindowSpec custom(const Eigen::VectorXd& values);

  // Periodic lookup g[idx mod N].
  double at(long idx) const;
};

// ---------------------------------------------------------------------------
// Problem configuration

struct ProblemConfig {
  int N = 0;
  WindowSpec window;
  int L = 1;
  std::optional<double> snr_db;  // nullopt or +inf: noiseless
  std::uint64_t seed = 0;
  // Unknown signal is known to be real. Estimators then keep iterates real.
  bool real_signal = false;
  // Permit hops that do not divide N; frames() becomes ceil(N / L).
  bool allow_ragged_hop = false;

  int W() const { return window.W; }
  int frames() const { return (N + L - 1) / L; }

  // Throws InvalidInputError describing the first violated constraint.
  void validate() const;
};

// ---------------------------------------------------------------------------
// Measurements

struct MeasurementSet {
  Eigen::MatrixXd Z;   // frames x N intensities |X[m,k]|^2
  Eigen::MatrixXcd Y;  // frames x N, (1/N) DFT of each row of Z

  int frames() const { return static_cast<int>(Z.rows()); }
  int N() const { return static_cast<int>(Z.cols()); }
};

// Builds Y from Z. Defined in forward.cpp.
MeasurementSet measurements_from_intensities(Eigen::MatrixXd Z);

struct NoiseOptions {
  bool clip_negative = false;
};

// Adds i.i.d. N(0, s^2) to every entry of Z with
// s = ||Z||_F / (sqrt(count) * 10^(snr_db / 20)); Y is recomputed from the
// noisy Z. snr_db = +inf leaves the measurements untouched.
MeasurementSet add_noise(const MeasurementSet& clean, double snr_db,
                         std::uint64_t seed, NoiseOptions options = {});

// ---------------------------------------------------------------------------
// Distance up to global phase

struct PhaseDistance {
  double d = 0.0;
  double phi = 0.0;  // in [0, 2 pi); z ~ x e^{j phi}
};

PhaseDistance distance(const Signal& z, const Signal& x);
PhaseDistance distance(const Eigen::VectorXcd& z, const Eigen::VectorXcd& x);

double relative_error(const Signal& estimate, const Signal& truth);

// ---------------------------------------------------------------------------
// Trial records

enum class Method { kLsInit, kGd, kGla, kRecursive, kUnitModulus };

std::string to_string(Method method);
Method method_from_string(const std::string& name);

struct TrialRecord {
  ProblemConfig config;
  Method method = Method::kLsInit;
  double error = std::numeric_limits<double>::quiet_NaN();
  int iterations = 0;
  std::vector<double> loss_trace;
  std::vector<double> error_trace;  // filled when the truth is known
  double wall_time = 0.0;
};

}  // namespace stftpr

#endif  // STFTPR_MODEL_HPP_
