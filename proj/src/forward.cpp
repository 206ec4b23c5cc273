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

#include "stftpr/forward.hpp"

#include <algorithm>
#include <limits>

#include "stftpr/fft.hpp"

namespace stftpr {

namespace {

void check_signal(const Eigen::VectorXcd& x, const ProblemConfig& cfg) {
  cfg.validate();
  if (x.size() != cfg.N) {
    throw DimensionError("signal length " + std::to_string(x.size()) +
                         " does not match N=" + std::to_string(cfg.N));
  }
}

}  // namespace

Eigen::MatrixXcd stft(const Signal& x, const ProblemConfig& cfg) {
  check_signal(x.values(), cfg);
  const int N = cfg.N;
  const int frames = cfg.frames();
  Eigen::MatrixXcd X(frames, N);
  Eigen::VectorXcd windowed(N);
  for (int m = 0; m < frames; ++m) {
    const long shift = static_cast<long>(m) * cfg.L;
    for (int n = 0; n < N; ++n) windowed[n] = x[n] * cfg.window.at(shift - n);
    X.row(m) = fft::forward(windowed).transpose();
  }
  return X;
}

Eigen::MatrixXcd transform_y(const Eigen::MatrixXd& Z) {
  const Eigen::Index N = Z.cols();
  Eigen::MatrixXcd Y(Z.rows(), N);
  for (Eigen::Index m = 0; m < Z.rows(); ++m) {
    const Eigen::VectorXcd row = Z.row(m).transpose().cast<Complex>();
    Y.row(m) = (fft::forward(row) / static_cast<double>(N)).transpose();
  }
  return Y;
}

MeasurementSet measurements_from_intensities(Eigen::MatrixXd Z) {
  MeasurementSet out;
  out.Y = transform_y(Z);
  out.Z = std::move(Z);
  return out;
}

MeasurementSet measure(const Signal& x, const ProblemConfig& cfg) {
  return measurements_from_intensities(stft(x, cfg).cwiseAbs2());
}

Complex apply_h(const Eigen::VectorXcd& z, int m, int ell, const ProblemConfig& cfg) {
  const long N = cfg.N;
  if (z.size() != N) throw DimensionError("apply_h: length mismatch");
  const long shift = static_cast<long>(m) * cfg.L;
  Complex acc = 0.0;
  for (long n = 0; n < N; ++n) {
    const double c = cfg.window.at(shift - n) * cfg.window.at(shift - n - ell);
    if (c == 0.0) continue;
    acc += c * z[n] * std::conj(z[wrap_index(n + ell, N)]);
  }
  return acc;
}

Complex apply_h(const Signal& z, int m, int ell, const ProblemConfig& cfg) {
  return apply_h(z.values(), m, ell, cfg);
}

Eigen::VectorXd diagonal_first_column(const WindowSpec& window, int ell) {
  const int N = window.N;
  Eigen::VectorXd c(N);
  for (int n = 0; n < N; ++n) c[n] = window.at(n) * window.at(static_cast<long>(n) - ell);
  return c;
}

Eigen::VectorXcd DiagonalSystem::apply(const Eigen::VectorXcd& v) const {
  const long N = first_column.size();
  if (v.size() != N) throw DimensionError("diagonal system: length mismatch");
  Eigen::VectorXcd out = Eigen::VectorXcd::Zero(rows);
  for (int m = 0; m < rows; ++m) {
    const long shift = static_cast<long>(m) * L;
    Complex acc = 0.0;
    for (long n = 0; n < N; ++n) {
      const double c = first_column[wrap_index(shift - n, N)];
      if (c != 0.0) acc += c * v[n];
    }
    out[m] = acc;
  }
  return out;
}

CirculantOperator DiagonalSystem::circulant() const {
  return CirculantOperator(first_column);
}

DiagonalSystem diagonal_system(int ell, const ProblemConfig& cfg) {
  cfg.validate();
  if (std::abs(ell) > cfg.W() - 1) {
    throw InvalidInputError("diagonal index |l| must be <= W - 1");
  }
  DiagonalSystem sys;
  sys.ell = ell;
  sys.L = cfg.L;
  sys.rows = cfg.frames();
  sys.first_column = diagonal_first_column(cfg.window, ell);
  sys.spectrum = fft::forward(sys.first_column.cast<Complex>());
  return sys;
}

AdmissibilityReport is_admissible_at(const WindowSpec& window,
                                     const std::vector<int>& ells, double tol) {
  AdmissibilityReport report;
  report.admissible = true;
  report.min_modulus = std::numeric_limits<double>::infinity();
  report.worst_relative_margin = std::numeric_limits<double>::infinity();
  for (int ell : ells) {
    const Eigen::VectorXd c = diagonal_first_column(window, ell);
    const Eigen::VectorXd mags = fft::forward(c.cast<Complex>()).cwiseAbs();
    const double top = mags.maxCoeff();
    const double low = mags.minCoeff();
    const double rel = top > 0.0 ? low / top : 0.0;
    report.min_modulus = std::min(report.min_modulus, low);
    if (rel < report.worst_relative_margin) {
      report.worst_relative_margin = rel;
      report.worst_ell = ell;
    }
    if (!(top > 0.0) || low <= tol * top) report.admissible = false;
  }
  return report;
}

AdmissibilityReport is_admissible(const WindowSpec& window, int W, double tol) {
  if (W < 1) throw InvalidInputError("is_admissible: W must be positive");
  std::vector<int> ells;
  for (int ell = -(W - 1); ell <= W - 1; ++ell) ells.push_back(ell);
  return is_admissible_at(window, ells, tol);
}

AdmissibilityReport is_admissible(const WindowSpec& window, double tol) {
  return is_admissible(window, window.W, tol);
}

QuadraticTerms quadratic_terms(const WindowSpec& window) {
  QuadraticTerms terms;
  terms.W = window.W;
  const long N = window.N;
  std::vector<int> support;
  for (int s = 0; s < N; ++s) {
    if (window.values[s] != 0.0) support.push_back(s);
  }
  for (int ell = -(window.W - 1); ell <= window.W - 1; ++ell) {
    std::vector<QuadraticTerms::Tap> taps;
    for (int s : support) {
      const double c = window.values[s] * window.at(static_cast<long>(s) - ell);
      if (c != 0.0) taps.push_back({s, c});
    }
    terms.ells.push_back(ell);
    terms.taps.push_back(std::move(taps));
  }
  return terms;
}

}  // namespace stftpr
