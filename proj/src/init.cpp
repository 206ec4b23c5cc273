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

#include "stftpr/init.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "stftpr/fft.hpp"
#include "stftpr/forward.hpp"

namespace stftpr {

// ---------------------------------------------------------------------------
// CorrelationApprox

void CorrelationApprox::set_diagonal(int ell, const Eigen::VectorXcd& values) {
  const long N = size();
  if (values.size() != N) throw DimensionError("set_diagonal: length mismatch");
  const long l = wrap_index(ell, N);
  if (l == 0) {
    for (long i = 0; i < N; ++i) X0(i, i) = Complex(values[i].real(), 0.0);
  } else {
    for (long i = 0; i < N; ++i) {
      const long j = wrap_index(i + l, N);
      X0(i, j) = values[i];
      X0(j, i) = std::conj(values[i]);
    }
  }
  const int canonical = static_cast<int>(l <= N / 2 ? l : l - N);
  if (std::find(populated_diagonals.begin(), populated_diagonals.end(), canonical) ==
      populated_diagonals.end()) {
    populated_diagonals.push_back(canonical);
  }
}

Eigen::VectorXcd CorrelationApprox::diagonal(int ell) const {
  const long N = size();
  Eigen::VectorXcd d(N);
  for (long i = 0; i < N; ++i) d[i] = X0(i, wrap_index(i + ell, N));
  return d;
}

// ---------------------------------------------------------------------------
// Power iteration

namespace {

Eigen::VectorXcd start_vector(Eigen::Index n, std::uint64_t seed) {
  Rng rng(seed);
  Eigen::VectorXcd v(n);
  for (Eigen::Index i = 0; i < n; ++i) {
    const double re = rng.normal();
    const double im = rng.normal();
    v[i] = Complex(1.0 + 0.1 * re, 0.1 * im);
  }
  return v.normalized();
}

double max_abs_column_sum(const Eigen::MatrixXcd& A) {
  return A.cwiseAbs().colwise().sum().maxCoeff();
}

Eigen::VectorXcd gauge(Eigen::VectorXcd v) {
  Eigen::Index idx = 0;
  v.cwiseAbs().maxCoeff(&idx);
  const Complex pivot = v[idx];
  if (std::abs(pivot) > 0.0) {
    v *= std::conj(pivot) / std::abs(pivot);
    v[idx] = Complex(v[idx].real(), 0.0);
  }
  return v;
}

}  // namespace

EigenResult principal_eigenvector(const Eigen::MatrixXcd& A,
                                  const PowerIterationOptions& options) {
  if (A.rows() != A.cols() || A.rows() == 0) {
    throw DimensionError("principal_eigenvector: matrix must be square and non-empty");
  }
  const double shift = max_abs_column_sum(A);
  EigenResult result;
  Eigen::VectorXcd v = start_vector(A.rows(), options.seed);
  if (shift == 0.0) {
    result.vector = gauge(v);
    return result;
  }
  // Shifted operator scaled so its spectrum lies in [0, 1].
  Eigen::MatrixXcd B = A / (2.0 * shift);
  B.diagonal().array() += 0.5;

  // Repeated squaring: v <- B^(2^j) v0. Small relative gaps would otherwise
  // need far more than max_iter plain steps.
  Eigen::MatrixXcd P = B;
  Eigen::VectorXcd prev = v;
  for (int j = 0; j < options.max_squarings; ++j) {
    P = (P * P).eval();
    const double norm = P.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) break;
    P /= norm;
    Eigen::VectorXcd w = P * v;
    const double wn = w.norm();
    if (!(wn > 0.0)) break;
    w /= wn;
    const bool settled = (w - prev).norm() < options.tol;
    prev = std::move(w);
    if (settled) break;
  }
  v = prev;

  bool converged = false;
  int it = 0;
  double step = 0.0;
  while (it < options.max_iter) {
    ++it;
    Eigen::VectorXcd w = B * v;
    const double norm = w.norm();
    if (!(norm > 0.0) || !std::isfinite(norm)) break;
    w /= norm;
    step = (w - v).norm();
    v = std::move(w);
    if (step < options.tol) {
      converged = true;
      break;
    }
  }
  v = gauge(v);
  const Eigen::VectorXcd Av = A * v;
  result.vector = v;
  result.eigenvalue = v.dot(Av).real();
  result.iterations = it;
  result.residual = (Av - result.eigenvalue * v).norm();
  if (!converged) {
    std::ostringstream msg;
    msg << "power iteration did not converge in " << options.max_iter
        << " iterations (last step " << step << ", residual " << result.residual << ")";
    throw ConvergenceError(msg.str(), result.residual);
  }
  return result;
}

EigenResult principal_eigenvector(const CorrelationApprox& approx,
                                  const PowerIterationOptions& options) {
  return principal_eigenvector(approx.X0, options);
}

double second_eigenvalue(const Eigen::MatrixXcd& A, const EigenResult& top,
                         const PowerIterationOptions& options) {
  const double shift = max_abs_column_sum(A);
  const Eigen::VectorXcd& u = top.vector;
  Eigen::VectorXcd v = start_vector(A.rows(), options.seed ^ 0xa5a5a5a5ULL);
  v -= u * u.dot(v);
  if (v.norm() == 0.0) return top.eigenvalue;
  v.normalize();
  for (int it = 0; it < options.max_iter; ++it) {
    Eigen::VectorXcd w = A * v + shift * v;
    w -= u * u.dot(w);
    const double norm = w.norm();
    if (!(norm > 0.0)) break;
    w /= norm;
    const double step = (w - v).norm();
    v = std::move(w);
    if (step < options.tol) break;
  }
  return v.dot(A * v).real();
}

// ---------------------------------------------------------------------------
// Interpolation

std::string to_string(InterpolationKind kind) {
  switch (kind) {
    case InterpolationKind::kLinear:
      return "linear";
    case InterpolationKind::kCubic:
      return "cubic";
    case InterpolationKind::kIdealLowpass:
      return "ideal";
  }
  return "unknown";
}

InterpolationKind interpolation_from_string(const std::string& name) {
  if (name == "linear") return InterpolationKind::kLinear;
  if (name == "cubic") return InterpolationKind::kCubic;
  if (name == "ideal") return InterpolationKind::kIdealLowpass;
  throw InvalidInputError("unknown interpolation '" + name + "'");
}

namespace {

// Keys cubic convolution kernel, a = -0.5.
double keys_kernel(double t) {
  constexpr double a = -0.5;
  t = std::abs(t);
  if (t <= 1.0) return ((a + 2.0) * t - (a + 3.0)) * t * t + 1.0;
  if (t < 2.0) return ((a * t - 5.0 * a) * t + 8.0 * a) * t - 4.0 * a;
  return 0.0;
}

}  // namespace

InterpolationFilter InterpolationFilter::linear(int L) {
  if (L < 1) throw InvalidInputError("interpolation factor must be positive");
  InterpolationFilter f;
  f.kind = InterpolationKind::kLinear;
  f.L = L;
  f.half_width = L - 1;
  f.taps.resize(2 * f.half_width + 1);
  for (int k = -f.half_width; k <= f.half_width; ++k) {
    f.taps[k + f.half_width] = 1.0 - static_cast<double>(std::abs(k)) / L;
  }
  return f;
}

InterpolationFilter InterpolationFilter::cubic(int L) {
  if (L < 1) throw InvalidInputError("interpolation factor must be positive");
  InterpolationFilter f;
  f.kind = InterpolationKind::kCubic;
  f.L = L;
  f.half_width = 2 * L - 1;
  f.taps.resize(2 * f.half_width + 1);
  for (int k = -f.half_width; k <= f.half_width; ++k) {
    f.taps[k + f.half_width] = keys_kernel(static_cast<double>(k) / L);
  }
  return f;
}

InterpolationFilter InterpolationFilter::ideal_lowpass(int N, int L, int band_start) {
  if (L < 1 || N < 1 || N % L != 0) {
    throw InvalidInputError("ideal low-pass interpolation requires L | N");
  }
  InterpolationFilter f;
  f.kind = InterpolationKind::kIdealLowpass;
  f.L = L;
  f.N = N;
  f.band_start = band_start;
  return f;
}

InterpolationFilter InterpolationFilter::make(InterpolationKind kind, int L, int N) {
  switch (kind) {
    case InterpolationKind::kLinear:
      return linear(L);
    case InterpolationKind::kCubic:
      return cubic(L);
    case InterpolationKind::kIdealLowpass:
      return ideal_lowpass(N, L);
  }
  throw InvalidInputError("unknown interpolation kind");
}

Eigen::VectorXcd upsample_diagonal(const Eigen::VectorXcd& y_sub,
                                   const InterpolationFilter& filter, int N) {
  const int L = filter.L;
  if (L < 1) throw InvalidInputError("upsample: L must be positive");
  const long expected = (static_cast<long>(N) + L - 1) / L;
  if (y_sub.size() != expected) {
    throw DimensionError("upsample: expected " + std::to_string(expected) +
                         " samples, got " + std::to_string(y_sub.size()));
  }
  Eigen::VectorXcd expanded = Eigen::VectorXcd::Zero(N);
  for (long m = 0; m < y_sub.size(); ++m) expanded[m * L] = y_sub[m];

  if (filter.kind == InterpolationKind::kIdealLowpass) {
    if (filter.N != N) throw DimensionError("upsample: ideal filter built for another N");
    Eigen::VectorXcd spectrum = fft::forward(expanded);
    Eigen::VectorXcd masked = Eigen::VectorXcd::Zero(N);
    const int band = N / L;
    for (int i = 0; i < band; ++i) {
      const long k = wrap_index(filter.band_start + i, N);
      masked[k] = static_cast<double>(L) * spectrum[k];
    }
    return fft::inverse(masked);
  }

  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(N);
  for (long m = 0; m < y_sub.size(); ++m) {
    const long center = m * L;
    for (int k = -filter.half_width; k <= filter.half_width; ++k) {
      const double h = filter.taps[k + filter.half_width];
      if (h == 0.0) continue;
      out[wrap_index(center + k, N)] += h * y_sub[m];
    }
  }
  return out;
}

// ---------------------------------------------------------------------------
// Least-squares initialization

namespace {

int max_solved_diagonal(const ProblemConfig& cfg) {
  return std::min(cfg.W() - 1, cfg.N / 2);
}

Eigen::VectorXcd y_column(const MeasurementSet& Y, int ell) {
  return Y.Y.col(wrap_index(ell, Y.N()));
}

void check_measurements(const MeasurementSet& Y, const ProblemConfig& cfg) {
  cfg.validate();
  if (Y.N() != cfg.N || Y.frames() != cfg.frames() || Y.Y.rows() != Y.Z.rows() ||
      Y.Y.cols() != Y.Z.cols()) {
    throw DimensionError("measurement shape does not match the configuration");
  }
}

// Shared tail of both least-squares initializations. `columns[l]` is the
// full-overlap column y_l for l = 0 .. max_solved_diagonal(cfg).
InitResult finish_ls_init(const std::vector<Eigen::VectorXcd>& columns,
                          const ProblemConfig& cfg, const InitOptions& options) {
  const int N = cfg.N;
  InitResult result;
  result.approx = CorrelationApprox(N);

  std::vector<Eigen::VectorXcd> diags;
  diags.reserve(columns.size());
  for (std::size_t ell = 0; ell < columns.size(); ++ell) {
    const CirculantOperator G(diagonal_first_column(cfg.window, static_cast<int>(ell)));
    Eigen::VectorXcd d = G.pinv_solve(columns[ell], options.pinv_tol);
    if (cfg.real_signal) d = d.real().cast<Complex>();
    diags.push_back(std::move(d));
  }

  double energy = 0.0;
  for (int n = 0; n < N; ++n) {
    const double e = diags[0][n].real();
    if (e > 0.0) energy += e;
  }
  for (std::size_t ell = 0; ell < diags.size(); ++ell) {
    result.approx.set_diagonal(static_cast<int>(ell), diags[ell]);
  }
  if (!(energy > 0.0)) {
    result.degenerate = true;
    result.estimate = Signal::zeros(N, cfg.real_signal);
    return result;
  }
  result.scale = std::sqrt(energy);

  EigenResult top;
  if (cfg.real_signal) {
    const Eigen::MatrixXcd A = result.approx.X0.real().cast<Complex>();
    top = principal_eigenvector(A, options.power);
    result.estimate =
        Signal::from_real(top.vector.real() * result.scale).gauge_fixed();
  } else {
    top = principal_eigenvector(result.approx.X0, options.power);
    result.estimate = Signal::from_complex(top.vector * result.scale).gauge_fixed();
  }
  result.eigenvalue = top.eigenvalue;
  result.power_iterations = top.iterations;
  return result;
}

}  // namespace

InitResult ls_init_L1(const MeasurementSet& Y, const ProblemConfig& cfg,
                      const InitOptions& options) {
  check_measurements(Y, cfg);
  if (cfg.L != 1) throw InvalidInputError("ls_init_L1 requires L = 1");
  std::vector<Eigen::VectorXcd> columns;
  for (int ell = 0; ell <= max_solved_diagonal(cfg); ++ell) {
    columns.push_back(y_column(Y, ell));
  }
  return finish_ls_init(columns, cfg, options);
}

InitResult ls_init_Lgt1(const MeasurementSet& Y, const ProblemConfig& cfg,
                        const InterpolationFilter& filter, const InitOptions& options) {
  check_measurements(Y, cfg);
  if (cfg.L <= 1) throw InvalidInputError("ls_init_Lgt1 requires L > 1");
  if (filter.L != cfg.L) throw InvalidInputError("interpolation factor must equal L");
  std::vector<Eigen::VectorXcd> columns;
  for (int ell = 0; ell <= max_solved_diagonal(cfg); ++ell) {
    columns.push_back(upsample_diagonal(y_column(Y, ell), filter, cfg.N));
  }
  return finish_ls_init(columns, cfg, options);
}

InitResult ls_init(const MeasurementSet& Y, const ProblemConfig& cfg,
                   InterpolationKind interp, const InitOptions& options) {
  if (cfg.L == 1) return ls_init_L1(Y, cfg, options);
  return ls_init_Lgt1(Y, cfg, InterpolationFilter::make(interp, cfg.L, cfg.N), options);
}

// ---------------------------------------------------------------------------
// Unit-modulus recovery

UnitModulusResult unit_modulus_init(const MeasurementSet& Y, const ProblemConfig& cfg,
                                    int M, const InitOptions& options) {
  check_measurements(Y, cfg);
  if (cfg.L != 1) throw InvalidInputError("unit_modulus_init requires L = 1");
  if (M < 1 || M > cfg.W() - 1) {
    throw InvalidInputError("unit_modulus_init requires 1 <= M <= W - 1 (got M=" +
                            std::to_string(M) + ", W=" + std::to_string(cfg.W()) + ")");
  }
  const AdmissibilityReport adm = is_admissible_at(cfg.window, {0, M}, options.pinv_tol);
  if (!adm.admissible) {
    throw InvalidWindowError("window is not admissible at diagonals 0 and M (worst l=" +
                             std::to_string(adm.worst_ell) + ")");
  }
  const int N = cfg.N;
  const CirculantOperator G0(diagonal_first_column(cfg.window, 0));
  const CirculantOperator GM(diagonal_first_column(cfg.window, M));
  const Eigen::VectorXcd d0 = G0.pinv_solve(y_column(Y, 0), options.pinv_tol);
  Eigen::VectorXcd dM = GM.pinv_solve(y_column(Y, M), options.pinv_tol);
  // Hermitian part: diagonal M and its mirror each carry half the solve,
  // unless they coincide (2M = N).
  if (2 * M != N) dM *= 0.5;

  UnitModulusResult result;
  result.approx = CorrelationApprox(N);
  result.approx.set_diagonal(0, d0);
  result.approx.set_diagonal(M, dM);
  Eigen::MatrixXcd A = result.approx.X0;
  if (cfg.real_signal) A = A.real().cast<Complex>();

  const EigenResult top = principal_eigenvector(A, options.power);
  result.eigenvalue = top.eigenvalue;
  result.second_eigenvalue = second_eigenvalue(A, top, options.power);
  if (cfg.real_signal) {
    result.estimate = Signal::from_real(top.vector.real().normalized()).gauge_fixed();
  } else {
    result.estimate = Signal::from_complex(top.vector).gauge_fixed();
  }
  return result;
}

// ---------------------------------------------------------------------------
// Recursive recovery

Signal recursive_recovery(const MeasurementSet& Y, const ProblemConfig& cfg,
                          const InitOptions& options) {
  check_measurements(Y, cfg);
  if (cfg.L != 1) throw InvalidInputError("recursive_recovery requires L = 1");
  const AdmissibilityReport adm = is_admissible_at(cfg.window, {0, 1}, options.pinv_tol);
  if (!adm.admissible) {
    throw InvalidWindowError("window is not admissible at diagonals 0 and 1");
  }
  const int N = cfg.N;
  const CirculantOperator G0(diagonal_first_column(cfg.window, 0));
  const CirculantOperator G1(diagonal_first_column(cfg.window, 1));
  const Eigen::VectorXd d0 = G0.pinv_solve(y_column(Y, 0), options.pinv_tol).real();
  Eigen::VectorXcd d1 = G1.pinv_solve(y_column(Y, 1), options.pinv_tol);
  if (cfg.real_signal) d1 = d1.real().cast<Complex>();

  const double peak = d0.cwiseAbs().maxCoeff();
  const double tau = 1e-6 * std::sqrt(peak);
  if (!(d0[0] > 0.0)) {
    std::ostringstream msg;
    msg << "recursive recovery: main-diagonal energy at index 0 is " << d0[0]
        << " (no real square root)";
    throw VanishingSignalError(msg.str(), 0);
  }
  Eigen::VectorXcd x(N);
  x[0] = std::sqrt(d0[0]);
  if (!(std::abs(x[0]) >= tau) || peak == 0.0) {
    throw VanishingSignalError("recursive recovery: signal vanishes at index 0", 0);
  }
  for (int n = 1; n < N; ++n) {
    // d1[n-1] = x[n-1] conj(x[n])
    x[n] = std::conj(d1[n - 1] / x[n - 1]);
    if (!(std::abs(x[n]) >= tau)) {
      throw VanishingSignalError(
          "recursive recovery: signal vanishes at index " + std::to_string(n), n);
    }
  }
  if (cfg.real_signal) return Signal::from_real(x.real()).gauge_fixed();
  return Signal::from_complex(std::move(x)).gauge_fixed();
}

}  // namespace stftpr
