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

#include "stftpr/model.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <sstream>

namespace stftpr {

namespace {

constexpr double kTwoPi = 2.0 * std::numbers::pi;

std::uint64_t splitmix64(std::uint64_t x) {
  x += 0x9e3779b97f4a7c15ULL;
  x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
  x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
  return x ^ (x >> 31);
}

}  // namespace

// ---------------------------------------------------------------------------
// Rng

double Rng::uniform() {
  return static_cast<double>(engine_() >> 11) * 0x1.0p-53;
}

double Rng::normal() {
  if (spare_normal_) {
    const double v = *spare_normal_;
    spare_normal_.reset();
    return v;
  }
  double u1 = uniform();
  while (u1 <= 0.0) u1 = uniform();
  const double u2 = uniform();
  const double radius = std::sqrt(-2.0 * std::log(u1));
  spare_normal_ = radius * std::sin(kTwoPi * u2);
  return radius * std::cos(kTwoPi * u2);
}

double Rng::rademacher() { return (engine_() >> 63) ? 1.0 : -1.0; }

std::uint64_t derive_seed(std::uint64_t base,
                          std::initializer_list<std::uint64_t> indices) {
  std::uint64_t h = splitmix64(base);
  for (std::uint64_t i : indices) h = splitmix64(h ^ splitmix64(i + 0x5851f42d4c957f2dULL));
  return h;
}

// ---------------------------------------------------------------------------
// Signal

Signal Signal::from_complex(Eigen::VectorXcd values) {
  if (values.size() < 2) {
    throw InvalidInputError("signal length must be at least 2");
  }
  Signal s;
  s.values_ = std::move(values);
  s.real_ = false;
  return s;
}

Signal Signal::from_real(const Eigen::VectorXd& values) {
  if (values.size() < 2) {
    throw InvalidInputError("signal length must be at least 2");
  }
  Signal s;
  s.values_ = values.cast<Complex>();
  s.real_ = true;
  return s;
}

Signal Signal::zeros(int length, bool real) {
  if (real) return from_real(Eigen::VectorXd::Zero(length));
  return from_complex(Eigen::VectorXcd::Zero(length));
}

Signal Signal::rotated(double phi) const {
  const Complex rot = std::polar(1.0, phi);
  Signal out = from_complex(values_ * rot);
  if (real_) {
    const double s = std::sin(phi);
    if (std::abs(s) < 1e-15) {
      out.values_ = out.values_.real().cast<Complex>();
      out.real_ = true;
    }
  }
  return out;
}

Signal Signal::scaled(double factor) const {
  Signal out = *this;
  out.values_ *= factor;
  return out;
}

Signal Signal::gauge_fixed() const {
  if (values_.size() == 0) return *this;
  Eigen::Index idx = 0;
  values_.cwiseAbs().maxCoeff(&idx);
  const Complex pivot = values_[idx];
  if (std::abs(pivot) == 0.0) return *this;
  Signal out = *this;
  if (real_) {
    if (pivot.real() < 0.0) out.values_ = -out.values_;
  } else {
    out.values_ *= std::conj(pivot) / std::abs(pivot);
    out.values_[idx] = Complex(std::abs(pivot), 0.0);
  }
  return out;
}

Signal random_gaussian_signal(int length, bool real, Rng& rng) {
  if (real) {
    Eigen::VectorXd v(length);
    for (int n = 0; n < length; ++n) v[n] = rng.normal();
    return Signal::from_real(v);
  }
  Eigen::VectorXcd v(length);
  const double s = std::sqrt(0.5);
  for (int n = 0; n < length; ++n) {
    const double re = rng.normal();
    const double im = rng.normal();
    v[n] = Complex(s * re, s * im);
  }
  return Signal::from_complex(std::move(v));
}

// ---------------------------------------------------------------------------
// Windows

std::string to_string(WindowKind kind) {
  switch (kind) {
    case WindowKind::kRectangular:
      return "rect";
    case WindowKind::kGaussian:
      return "gauss";
    case WindowKind::kCustom:
      return "custom";
  }
  return "unknown";
}

WindowSpec WindowSpec::rectangular(int N, int W) {
  if (N < 2 || W < 1 || W > N) {
    throw InvalidInputError("rectangular window requires 1 <= W <= N");
  }
  WindowSpec w;
  w.kind = WindowKind::kRectangular;
  w.N = N;
  w.W = W;
  w.values = Eigen::VectorXd::Zero(N);
  w.values.head(W).setOnes();
  return w;
}

WindowSpec WindowSpec::gaussian(int N, double sigma) {
  if (!(sigma > 0.0)) throw InvalidInputError("gaussian window requires sigma > 0");
  const int W = static_cast<int>(std::ceil(3.0 * sigma - 1e-12));
  if (N < 2 || W > N) {
    throw InvalidInputError("gaussian window support ceil(3 sigma) exceeds N");
  }
  WindowSpec w;
  w.kind = WindowKind::kGaussian;
  w.N = N;
  w.W = std::max(W, 1);
  w.sigma = sigma;
  w.values = Eigen::VectorXd::Zero(N);
  for (int n = 0; n < w.W; ++n) {
    w.values[n] = std::exp(-static_cast<double>(n) * n / (2.0 * sigma * sigma));
  }
  return w;
}

WindowSpec WindowSpec::custom(const Eigen::VectorXd& values) {
  if (values.size() < 2) throw InvalidInputError("window length must be at least 2");
  WindowSpec w;
  w.kind = WindowKind::kCustom;
  w.N = static_cast<int>(values.size());
  w.values = values;
  w.W = 0;
  for (int n = w.N - 1; n >= 0; --n) {
    if (values[n] != 0.0) {
      w.W = n + 1;
      break;
    }
  }
  return w;
}

double WindowSpec::at(long idx) const {
  long r = idx % N;
  if (r < 0) r += N;
  return values[r];
}

// ---------------------------------------------------------------------------
// ProblemConfig

void ProblemConfig::validate() const {
  std::ostringstream msg;
  if (N < 2) {
    msg << "N must be at least 2 (got " << N << ")";
  } else if (L < 1 || L > N) {
    msg << "hop L must satisfy 1 <= L <= N (got L=" << L << ", N=" << N << ")";
  } else if (!allow_ragged_hop && N % L != 0) {
    msg << "hop L must divide N (got L=" << L << ", N=" << N << ")";
  } else if (window.N != N || window.values.size() != N) {
    msg << "window materialized at length " << window.values.size()
        << " but N=" << N;
  } else if (window.W < 2 || window.W > N) {
    msg << "window length W must satisfy 2 <= W <= N (got W=" << window.W << ")";
  } else if (snr_db && std::isnan(*snr_db)) {
    msg << "snr_db must not be NaN";
  } else {
    return;
  }
  throw InvalidInputError(msg.str());
}

// ---------------------------------------------------------------------------
// Noise

MeasurementSet add_noise(const MeasurementSet& clean, double snr_db,
                         std::uint64_t seed, NoiseOptions options) {
  if (std::isnan(snr_db)) throw InvalidInputError("snr_db must not be NaN");
  if (std::isinf(snr_db) && snr_db > 0) return clean;
  const double count = static_cast<double>(clean.Z.size());
  const double sigma =
      clean.Z.norm() / (std::sqrt(count) * std::pow(10.0, snr_db / 20.0));
  Rng rng(seed);
  Eigen::MatrixXd noisy = clean.Z;
  // Column-major traversal fixes the draw order.
  for (Eigen::Index j = 0; j < noisy.cols(); ++j) {
    for (Eigen::Index i = 0; i < noisy.rows(); ++i) {
      noisy(i, j) += sigma * rng.normal();
      if (options.clip_negative && noisy(i, j) < 0.0) noisy(i, j) = 0.0;
    }
  }
  return measurements_from_intensities(std::move(noisy));
}

// ---------------------------------------------------------------------------
// Distance

PhaseDistance distance(const Eigen::VectorXcd& z, const Eigen::VectorXcd& x) {
  if (z.size() != x.size()) {
    throw DimensionError("distance: length mismatch (" + std::to_string(z.size()) +
                         " vs " + std::to_string(x.size()) + ")");
  }
  // x^H z; the minimizing rotation aligns x e^{j phi} with z.
  const Complex inner = x.dot(z);
  double phi = 0.0;
  if (std::abs(inner) > 0.0) {
    phi = std::arg(inner);
    if (phi < 0.0) phi += kTwoPi;
    if (phi >= kTwoPi) phi -= kTwoPi;
  }
  PhaseDistance out;
  out.phi = phi;
  out.d = (z - x * std::polar(1.0, phi)).norm();
  return out;
}

PhaseDistance distance(const Signal& z, const Signal& x) {
  return distance(z.values(), x.values());
}

double relative_error(const Signal& estimate, const Signal& truth) {
  const double norm = truth.norm();
  if (!(norm > 0.0)) throw InvalidInputError("relative_error: truth has zero norm");
  return distance(estimate, truth).d / norm;
}

// ---------------------------------------------------------------------------
// Methods

std::string to_string(Method method) {
  switch (method) {
    case Method::kLsInit:
      return "ls_init";
    case Method::kGd:
      return "gd";
    case Method::kGla:
      return "gla";
    case Method::kRecursive:
      return "recursive";
    case Method::kUnitModulus:
      return "unit_modulus";
  }
  return "unknown";
}

Method method_from_string(const std::string& name) {
  if (name == "ls_init" || name == "ls") return Method::kLsInit;
  if (name == "gd") return Method::kGd;
  if (name == "gla") return Method::kGla;
  if (name == "recursive") return Method::kRecursive;
  if (name == "unit_modulus" || name == "unit-modulus") return Method::kUnitModulus;
  throw InvalidInputError("unknown method '" + name + "'");
}

}  // namespace stftpr
