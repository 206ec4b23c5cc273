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

#include "stftpr/experiments.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <exception>
#include <filesystem>
#include <fstream>
#include <limits>
#include <mutex>
#include <numeric>
#include <sstream>
#include <thread>

#include "json.hpp"
#include "stftpr/fft.hpp"
#include "stftpr/forward.hpp"
#include "stftpr/io.hpp"

#ifndef STFTPR_VERSION
#define STFTPR_VERSION "0.0.0"
#endif

namespace stftpr {

const char* artifact_version() { return STFTPR_VERSION; }

std::string to_string(ExperimentKind kind) {
  switch (kind) {
    case ExperimentKind::kInitErrorSweep:
      return "init_error_sweep";
    case ExperimentKind::kBasin:
      return "basin_of_attraction";
    case ExperimentKind::kSnrSweep:
      return "snr_sweep";
    case ExperimentKind::kSingleExample:
      return "single_example";
    case ExperimentKind::kLossSurface:
      return "loss_surface";
    case ExperimentKind::kWindowSpectrum:
      return "window_spectrum";
    case ExperimentKind::kTheoryCertificates:
      return "theory_certificates";
  }
  return "unknown";
}

std::string to_string(StationaryKind kind) {
  switch (kind) {
    case StationaryKind::kMinimum:
      return "minimum";
    case StationaryKind::kSaddle:
      return "saddle";
    case StationaryKind::kMaximum:
      return "maximum";
  }
  return "unknown";
}

// ---------------------------------------------------------------------------
// Experiment settings

namespace {

constexpr double kInf = std::numeric_limits<double>::infinity();

// Stream tags keep the random draws of different experiments apart.
enum SeedTag : std::uint64_t {
  kTagInitSignal = 1,
  kTagBasinSignal,
  kTagBasinSigns,
  kTagSnrSignal,
  kTagSnrNoise,
  kTagExampleSignal,
  kTagExampleNoise,
  kTagCertificate,
};

}  // namespace

ExperimentSpec ExperimentSpec::defaults(ExperimentKind kind, bool quick) {
  ExperimentSpec s;
  s.kind = kind;
  s.quick = quick;
  switch (kind) {
    case ExperimentKind::kInitErrorSweep:
      s.N = {101};
      s.W = {3, 6, 9, 12, 15, 18, 21, 24, 27, 30};
      s.L = {1, 2, 3, 4, 5, 6};
      s.interp = {InterpolationKind::kLinear, InterpolationKind::kCubic};
      s.trials = 50;
      break;
    case ExperimentKind::kBasin:
      s.N = {43};
      s.W = {7};
      s.sigma = {0.0, 0.05, 0.1, 0.15, 0.2, 0.25, 0.3, 0.35, 0.4, 0.45, 0.5};
      s.L = {1, 2, 4};
      s.mu = {0.1};
      s.trials = 100;
      break;
    case ExperimentKind::kSnrSweep:
      s.N = {53};
      s.W = {19};
      s.L = {2, 4};
      s.snr_db = {0.0, 5.0, 10.0, 20.0, 30.0, 40.0, kInf};
      s.mu = {5e-3};
      s.interp = {InterpolationKind::kCubic};
      s.trials = 20;
      break;
    case ExperimentKind::kSingleExample:
      s.N = {23};
      s.W = {7, 11};
      s.L = {1, 3};
      s.snr_db = {20.0};
      s.mu = {5e-3};
      s.interp = {InterpolationKind::kCubic};
      s.trials = 1;
      break;
    case ExperimentKind::kLossSurface:
      s.N = {5};
      s.W = {2};
      s.L = {1};
      s.trials = 1;
      break;
    case ExperimentKind::kWindowSpectrum:
      s.N = {1000};
      s.W = {8, 16, 32, 64};
      s.sigma = {2.0, 4.0, 8.0, 16.0};
      s.trials = 1;
      break;
    case ExperimentKind::kTheoryCertificates:
      s.N = {9, 10, 11, 12, 13, 14, 15, 16, 17, 18, 19, 20, 21, 22, 23, 24, 25};
      s.W = {2, 3, 4};
      s.trials = 1000;
      break;
  }
  return s;
}

int ExperimentSpec::effective_trials() const {
  return quick ? std::max(1, trials / 10) : trials;
}

void ExperimentSpec::validate() const {
  if (trials < 1) throw InvalidInputError("trials must be >= 1");
  if (jobs < 1) throw InvalidInputError("jobs must be >= 1");
  if (max_iter < 1 || gla_max_iter < 1) throw InvalidInputError("iteration caps must be >= 1");
  if (N.empty()) throw InvalidInputError("N grid must not be empty");
  for (int n : N) {
    if (n < 2) throw InvalidInputError("grid N values must be >= 2");
  }
  for (int l : L) {
    if (l < 1) throw InvalidInputError("grid L values must be >= 1");
  }
  for (double m : mu) {
    if (!(m > 0.0)) throw InvalidInputError("grid mu values must be > 0");
  }
  auto need = [&](bool ok, const char* what) {
    if (!ok) throw InvalidInputError(std::string(what) + " grid must not be empty");
  };
  switch (kind) {
    case ExperimentKind::kInitErrorSweep:
      need(!W.empty(), "W");
      need(!L.empty(), "L");
      need(!interp.empty(), "interpolation");
      break;
    case ExperimentKind::kBasin:
      need(!W.empty(), "W");
      need(!L.empty(), "L");
      need(!sigma.empty(), "sigma");
      need(!mu.empty(), "mu");
      break;
    case ExperimentKind::kSnrSweep:
      need(!W.empty(), "W");
      need(!L.empty(), "L");
      need(!snr_db.empty(), "SNR");
      need(!mu.empty(), "mu");
      need(!interp.empty(), "interpolation");
      break;
    case ExperimentKind::kSingleExample:
      need(!W.empty(), "W");
      need(!snr_db.empty(), "SNR");
      need(!mu.empty(), "mu");
      need(!interp.empty(), "interpolation");
      if (W.size() != L.size()) {
        throw InvalidInputError("single example pairs W and L; grids must have equal length");
      }
      break;
    case ExperimentKind::kLossSurface:
      need(!W.empty(), "W");
      break;
    case ExperimentKind::kWindowSpectrum:
      need(!W.empty() || !sigma.empty(), "window");
      break;
    case ExperimentKind::kTheoryCertificates:
      need(!W.empty(), "W");
      break;
  }
}

// ---------------------------------------------------------------------------
// Helpers

namespace {

// Runs fn(0 .. count-1) on up to `jobs` threads. Results must be written to
// per-index slots by fn; the first exception is rethrown after joining.
template <class Fn>
void parallel_for(int count, int jobs, Fn&& fn) {
  if (jobs <= 1 || count <= 1) {
    for (int i = 0; i < count; ++i) fn(i);
    return;
  }
  std::atomic<int> next{0};
  std::exception_ptr error;
  std::mutex error_mutex;
  std::vector<std::thread> workers;
  const int n = std::min(jobs, count);
  workers.reserve(n);
  for (int w = 0; w < n; ++w) {
    workers.emplace_back([&] {
      for (;;) {
        const int i = next.fetch_add(1);
        if (i >= count) return;
        try {
          fn(i);
        } catch (...) {
          std::lock_guard<std::mutex> lock(error_mutex);
          if (!error) error = std::current_exception();
          next.store(count);
          return;
        }
      }
    });
  }
  for (auto& t : workers) t.join();
  if (error) std::rethrow_exception(error);
}

double mean_of(const std::vector<double>& v) {
  if (v.empty()) return 0.0;
  double s = 0.0;
  for (double x : v) s += x;
  return s / static_cast<double>(v.size());
}

// Sample standard deviation (n - 1); 0 for fewer than two values.
double std_of(const std::vector<double>& v) {
  if (v.size() < 2) return 0.0;
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - 1));
}

ProblemConfig make_config(int N, WindowSpec window, int L, bool real) {
  ProblemConfig cfg;
  cfg.N = N;
  cfg.window = std::move(window);
  cfg.L = L;
  cfg.real_signal = real;
  cfg.allow_ragged_hop = true;
  cfg.validate();
  return cfg;
}

GdOptions gd_options(const ExperimentSpec& spec, bool trace) {
  GdOptions o;
  o.mu = spec.mu.empty() ? 5e-3 : spec.mu.front();
  o.max_iter = spec.max_iter;
  o.relative_target = spec.relative_target;
  o.record_trace = trace;
  return o;
}

Signal random_sign_signal(int N, Rng& rng) {
  Eigen::VectorXd v(N);
  const double a = 1.0 / std::sqrt(static_cast<double>(N));
  for (int n = 0; n < N; ++n) v[n] = a * rng.rademacher();
  return Signal::from_real(v);
}

std::string fmt(double v) { return io::format_double(v); }

}  // namespace

// ---------------------------------------------------------------------------
// Initialization error sweep

std::vector<InitErrorRow> run_init_error_sweep(const ExperimentSpec& spec) {
  spec.validate();
  const int N = spec.N.front();
  const int trials = spec.effective_trials();
  struct Cell {
    int W;
    int L;
    InterpolationKind interp;
  };
  std::vector<Cell> cells;
  for (int W : spec.W) {
    for (int L : spec.L) {
      for (InterpolationKind k : spec.interp) cells.push_back({W, L, k});
    }
  }
  std::vector<double> errors(cells.size() * trials);
  parallel_for(static_cast<int>(errors.size()), spec.jobs, [&](int task) {
    const Cell& cell = cells[task / trials];
    const int t = task % trials;
    const ProblemConfig cfg =
        make_config(N, WindowSpec::gaussian(N, cell.W / 3.0), cell.L, true);
    Rng rng(derive_seed(spec.seed, {kTagInitSignal, static_cast<std::uint64_t>(t)}));
    const Signal x = random_gaussian_signal(N, true, rng);
    const MeasurementSet Y = measure(x, cfg);
    const InitResult r = ls_init(Y, cfg, cell.interp);
    errors[task] = relative_error(r.estimate, x);
  });
  std::vector<InitErrorRow> rows;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<double> e(errors.begin() + c * trials, errors.begin() + (c + 1) * trials);
    rows.push_back({cells[c].W, cells[c].L, cells[c].interp, mean_of(e), std_of(e), trials});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Basin of attraction

std::vector<BasinRow> run_basin_experiment(const ExperimentSpec& spec) {
  spec.validate();
  const int N = spec.N.front();
  const int W = spec.W.front();
  const int trials = spec.effective_trials();
  struct Cell {
    std::size_t sigma_index;
    int L;
  };
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < spec.sigma.size(); ++i) {
    for (int L : spec.L) cells.push_back({i, L});
  }
  const GdOptions options = gd_options(spec, false);
  std::vector<double> errors(cells.size() * trials);
  parallel_for(static_cast<int>(errors.size()), spec.jobs, [&](int task) {
    const Cell& cell = cells[task / trials];
    const auto t = static_cast<std::uint64_t>(task % trials);
    const double sigma = spec.sigma[cell.sigma_index];
    const ProblemConfig cfg = make_config(N, WindowSpec::rectangular(N, W), cell.L, true);
    Rng rng(derive_seed(spec.seed, {kTagBasinSignal, t}));
    const Signal x = random_gaussian_signal(N, true, rng);
    Rng signs(derive_seed(spec.seed, {kTagBasinSigns, t, cell.sigma_index}));
    Eigen::VectorXd x0 = x.real_values();
    for (int n = 0; n < N; ++n) x0[n] += sigma * signs.rademacher();
    const MeasurementSet Y = measure(x, cfg);
    try {
      errors[task] = gd_recover(Y, cfg, Signal::from_real(x0), options, &x).record.error;
    } catch (const DivergenceError&) {
      errors[task] = kInf;
    }
  });
  std::vector<BasinRow> rows;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    std::vector<double> e(errors.begin() + c * trials, errors.begin() + (c + 1) * trials);
    const auto converged = std::count_if(e.begin(), e.end(), [](double v) { return v <= 1e-4; });
    rows.push_back({spec.sigma[cells[c].sigma_index], cells[c].L, mean_of(e),
                    static_cast<double>(converged) / trials, trials});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// SNR sweep

std::vector<SnrRow> run_snr_sweep(const ExperimentSpec& spec) {
  spec.validate();
  const int N = spec.N.front();
  const int W = spec.W.front();
  const int trials = spec.effective_trials();
  struct Cell {
    std::size_t L_index;
    std::size_t snr_index;
  };
  std::vector<Cell> cells;
  for (std::size_t i = 0; i < spec.L.size(); ++i) {
    for (std::size_t j = 0; j < spec.snr_db.size(); ++j) cells.push_back({i, j});
  }
  const GdOptions gd = gd_options(spec, false);
  GlaOptions gla;
  gla.max_iter = spec.gla_max_iter;
  gla.record_trace = false;
  std::vector<double> gd_err(cells.size() * trials);
  std::vector<double> gla_err(cells.size() * trials);
  parallel_for(static_cast<int>(gd_err.size()), spec.jobs, [&](int task) {
    const Cell& cell = cells[task / trials];
    const auto t = static_cast<std::uint64_t>(task % trials);
    const ProblemConfig cfg =
        make_config(N, WindowSpec::rectangular(N, W), spec.L[cell.L_index], true);
    Rng rng(derive_seed(spec.seed, {kTagSnrSignal, t}));
    const Signal x = random_gaussian_signal(N, true, rng);
    MeasurementSet Y = measure(x, cfg);
    const double snr = spec.snr_db[cell.snr_index];
    if (!(std::isinf(snr) && snr > 0)) {
      Y = add_noise(Y, snr, derive_seed(spec.seed, {kTagSnrNoise, t, cell.L_index, cell.snr_index}));
    }
    const InitResult init = ls_init(Y, cfg, spec.interp.front());
    if (init.degenerate) {
      gd_err[task] = gla_err[task] = 1.0;
      return;
    }
    try {
      gd_err[task] = gd_recover(Y, cfg, init.estimate, gd, &x).record.error;
    } catch (const DivergenceError&) {
      gd_err[task] = kInf;
    }
    gla_err[task] = gla_recover(Y, cfg, init.estimate, gla, &x).record.error;
  });
  std::vector<SnrRow> rows;
  for (std::size_t c = 0; c < cells.size(); ++c) {
    const auto lo = gd_err.begin() + c * trials;
    const std::vector<double> g(lo, lo + trials);
    const auto lo2 = gla_err.begin() + c * trials;
    const std::vector<double> h(lo2, lo2 + trials);
    const double snr = spec.snr_db[cells[c].snr_index];
    const int L = spec.L[cells[c].L_index];
    rows.push_back({snr, L, Method::kGd, mean_of(g), trials});
    rows.push_back({snr, L, Method::kGla, mean_of(h), trials});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Single example

std::vector<SingleExampleCell> run_single_example(const ExperimentSpec& spec) {
  spec.validate();
  const int N = spec.N.front();
  const double snr = spec.snr_db.front();
  Rng rng(derive_seed(spec.seed, {kTagExampleSignal}));
  const Signal x = random_gaussian_signal(N, true, rng);
  std::vector<SingleExampleCell> cells(spec.W.size());
  const GdOptions options = gd_options(spec, true);
  parallel_for(static_cast<int>(cells.size()), spec.jobs, [&](int c) {
    SingleExampleCell& cell = cells[c];
    cell.W = spec.W[c];
    cell.L = spec.L[c];
    const ProblemConfig cfg = make_config(N, WindowSpec::rectangular(N, cell.W), cell.L, true);
    MeasurementSet Y = measure(x, cfg);
    if (!(std::isinf(snr) && snr > 0)) {
      Y = add_noise(Y, snr, derive_seed(spec.seed, {kTagExampleNoise, static_cast<std::uint64_t>(c)}));
    }
    const InitResult init = ls_init(Y, cfg, spec.interp.front());
    const RecoveryResult r = gd_recover(Y, cfg, init.estimate, options, &x);
    cell.truth = x;
    cell.init = init.estimate.rotated(-distance(init.estimate, x).phi);
    cell.estimate = r.estimate.rotated(-distance(r.estimate, x).phi);
    cell.record = r.record;
    cell.init_error = relative_error(init.estimate, x);
    cell.final_error = r.record.error;
  });
  return cells;
}

// ---------------------------------------------------------------------------
// Loss surface

std::vector<SurfacePoint> sample_loss_surface(const Signal& x, const ProblemConfig& cfg,
                                              const std::vector<double>& grid) {
  if (x.length() != cfg.N) throw DimensionError("surface: signal length mismatch");
  const MeasurementSet Y = measure(x, cfg);
  const LossEvaluator eval(Y, cfg);
  std::vector<SurfacePoint> out;
  out.reserve(grid.size() * grid.size());
  Eigen::VectorXcd z = x.values();
  for (double a : grid) {
    for (double b : grid) {
      z[0] = a;
      z[1] = b;
      out.push_back({a, b, eval.loss(z)});
    }
  }
  return out;
}

std::vector<StationaryPoint> find_stationary_points(const Signal& x, const ProblemConfig& cfg,
                                                    double lo, double hi, double resolution) {
  if (!(hi > lo) || !(resolution > 0.0)) throw InvalidInputError("surface: bad grid");
  const MeasurementSet Y = measure(x, cfg);
  const LossEvaluator eval(Y, cfg);
  Eigen::VectorXcd z = x.values();
  Eigen::VectorXcd g;
  auto grad2 = [&](double a, double b) {
    z[0] = a;
    z[1] = b;
    eval.loss_and_gradient(z, g);
    return Eigen::Vector2d(g[0].real(), g[1].real());
  };

  const int n = static_cast<int>(std::floor((hi - lo) / resolution + 1e-9)) + 1;
  std::vector<double> gn(static_cast<std::size_t>(n) * n);
  auto at = [&](int i, int j) -> double& { return gn[static_cast<std::size_t>(i) * n + j]; };
  for (int i = 0; i < n; ++i) {
    for (int j = 0; j < n; ++j) at(i, j) = grad2(lo + i * resolution, lo + j * resolution).norm();
  }

  std::vector<StationaryPoint> found;
  const double h = 1e-6;
  for (int i = 1; i + 1 < n; ++i) {
    for (int j = 1; j + 1 < n; ++j) {
      const double v = at(i, j);
      bool is_min = true;
      for (int di = -1; di <= 1 && is_min; ++di) {
        for (int dj = -1; dj <= 1; ++dj) {
          if ((di || dj) && at(i + di, j + dj) < v) {
            is_min = false;
            break;
          }
        }
      }
      if (!is_min) continue;
      Eigen::Vector2d p(lo + i * resolution, lo + j * resolution);
      Eigen::Matrix2d H;
      bool ok = false;
      for (int it = 0; it < 50; ++it) {
        const Eigen::Vector2d gp = grad2(p[0], p[1]);
        H.col(0) = (grad2(p[0] + h, p[1]) - grad2(p[0] - h, p[1])) / (2 * h);
        H.col(1) = (grad2(p[0], p[1] + h) - grad2(p[0], p[1] - h)) / (2 * h);
        H = 0.5 * (H + H.transpose()).eval();
        if (gp.norm() < 1e-13) {
          ok = true;
          break;
        }
        const Eigen::Vector2d step = H.fullPivLu().solve(gp);
        if (!step.allFinite()) break;
        p -= step;
        if (step.norm() < 1e-15) {
          ok = grad2(p[0], p[1]).norm() < 1e-10;
          break;
        }
      }
      if (!ok || p[0] < lo || p[0] > hi || p[1] < lo || p[1] > hi) continue;
      const bool duplicate = std::any_of(found.begin(), found.end(), [&](const StationaryPoint& s) {
        return std::hypot(s.z1 - p[0], s.z2 - p[1]) < 10 * resolution;
      });
      if (duplicate) continue;
      const Eigen::Vector2d ev = Eigen::SelfAdjointEigenSolver<Eigen::Matrix2d>(H).eigenvalues();
      StationaryKind kind = StationaryKind::kSaddle;
      if (ev[0] > 0.0) kind = StationaryKind::kMinimum;
      if (ev[1] < 0.0) kind = StationaryKind::kMaximum;
      z[0] = p[0];
      z[1] = p[1];
      found.push_back({p[0], p[1], eval.loss(z), kind});
    }
  }
  std::sort(found.begin(), found.end(), [](const StationaryPoint& a, const StationaryPoint& b) {
    return a.z1 != b.z1 ? a.z1 < b.z1 : a.z2 < b.z2;
  });
  return found;
}

// ---------------------------------------------------------------------------
// Window spectra

Eigen::VectorXd window_spectrum(const WindowSpec& window) {
  const Eigen::VectorXd mags = fft::forward(window.values.cast<Complex>()).cwiseAbs();
  return mags.head(window.N / 2);
}

int bandwidth_3db(const Eigen::VectorXd& magnitudes) {
  if (magnitudes.size() == 0) return 0;
  const double cut = magnitudes[0] / std::sqrt(2.0);
  int k = 0;
  while (k < magnitudes.size() && magnitudes[k] >= cut) ++k;
  return k;
}

namespace {

std::vector<std::pair<WindowSpec, double>> spectrum_windows(const ExperimentSpec& spec) {
  const int N = spec.N.front();
  std::vector<std::pair<WindowSpec, double>> out;
  for (int W : spec.W) out.emplace_back(WindowSpec::rectangular(N, W), W);
  for (double s : spec.sigma) out.emplace_back(WindowSpec::gaussian(N, s), s);
  return out;
}

}  // namespace

std::vector<SpectrumRow> run_window_spectrum(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<SpectrumRow> rows;
  for (const auto& [window, param] : spectrum_windows(spec)) {
    const Eigen::VectorXd mags = window_spectrum(window);
    for (int k = 0; k < mags.size(); ++k) rows.push_back({window.kind, param, k, mags[k]});
  }
  return rows;
}

std::vector<BandwidthRow> window_bandwidths(const ExperimentSpec& spec) {
  spec.validate();
  std::vector<BandwidthRow> rows;
  for (const auto& [window, param] : spectrum_windows(spec)) {
    rows.push_back({window.kind, param, bandwidth_3db(window_spectrum(window))});
  }
  return rows;
}

// ---------------------------------------------------------------------------
// Certificates

TheoryBounds TheoryBounds::make(int N, int W, double B) {
  if (N < 2 || W < 1) throw InvalidInputError("bounds need N >= 2 and W >= 1");
  TheoryBounds b;
  const double n = N;
  const double w = W;
  b.alpha = 4.0 * n / w;
  b.beta = 256.0 * n * n * w * w * w;
  b.basin_radius = 1.0 / (8.0 * std::sqrt(n) * w * w);
  const double gap = n - 2.0 * w + 1.0;
  if (B <= 0.0) B = gap > 0.0 ? n / (2.0 * gap) : 1.0;
  b.init_bound = 1.0 - std::sqrt(std::max(0.0, 1.0 - 2.0 * B * gap / n));
  return b;
}

bool CertificateReport::all_passed() const {
  return !results.empty() &&
         std::all_of(results.begin(), results.end(), [](const auto& r) { return r.passed(); });
}

namespace {

// Slack of "lhs <= rhs" relative to |rhs|; negative means violated.
double upper_margin(double lhs, double rhs) {
  const double scale = std::abs(rhs);
  if (scale == 0.0) return lhs <= rhs ? 0.0 : -kInf;
  return (rhs - lhs) / scale;
}

void tally(CertificateResult& r, double margin, const std::string& instance) {
  ++r.samples;
  r.worst_margin = r.samples == 1 ? margin : std::min(r.worst_margin, margin);
  if (margin < 0.0) {
    ++r.violations;
    if (r.counterexample.empty()) r.counterexample = instance;
  }
}

struct BallSample {
  ProblemConfig cfg;
  Signal x;
  Eigen::VectorXd z;
  PhaseDistance d;
};

// x with entries +-1/sqrt(N); z = x + r u with |u| = 1, r uniform in
// (0, radius], projected onto the box |z[n]| <= 1/sqrt(N) (which cannot move
// z away from x), then flipped in sign half of the time.
BallSample sample_ball(int N, int W, double radius, Rng& rng) {
  BallSample s;
  s.cfg = make_config(N, WindowSpec::rectangular(N, W), 1, true);
  s.x = random_sign_signal(N, rng);
  const double cap = 1.0 / std::sqrt(static_cast<double>(N));
  // Clipping can map z back onto x when every step points outward; such
  // draws have d = 0 up to rounding and are redrawn.
  do {
    Eigen::VectorXd u(N);
    for (int n = 0; n < N; ++n) u[n] = rng.normal();
    u.normalize();
    const double r = radius * (1.0 - rng.uniform());
    s.z = (s.x.real_values() + r * u).cwiseMax(-cap).cwiseMin(cap);
    if (rng.uniform() < 0.5) s.z = -s.z;
    s.d = distance(Eigen::VectorXcd(s.z.cast<Complex>()), s.x.values());
  } while (!(s.d.d > 1e-12 * radius));
  return s;
}

std::string describe(const BallSample& s, std::uint64_t seed, int index) {
  std::ostringstream os;
  os << "N=" << s.cfg.N << " W=" << s.cfg.W() << " sample=" << index << " seed=" << seed
     << " d=" << s.d.d;
  return os.str();
}

struct GradientAtSample {
  Eigen::VectorXd grad;
  double inner = 0.0;  // <grad, z - x e^{j phi}>
};

GradientAtSample gradient_at(const BallSample& s) {
  const MeasurementSet Y = measure(s.x, s.cfg);
  const LossEvaluator eval(Y, s.cfg);
  Eigen::VectorXcd g;
  eval.loss_and_gradient(s.z.cast<Complex>(), g);
  GradientAtSample out;
  out.grad = g.real();
  const Eigen::VectorXd aligned = (s.x.values() * std::polar(1.0, s.d.phi)).real();
  out.inner = out.grad.dot(s.z - aligned);
  return out;
}

template <class Check>
CertificateResult sample_certificate(const std::string& name, int samples, std::uint64_t seed,
                                     const std::vector<int>& Ns, const std::vector<int>& Ws,
                                     bool basin, Check&& check) {
  if (Ns.empty() || Ws.empty()) throw InvalidInputError(name + ": empty grid");
  CertificateResult r;
  r.name = name;
  for (int i = 0; i < samples; ++i) {
    const int N = Ns[i % Ns.size()];
    const int W = Ws[(i / Ns.size()) % Ws.size()];
    Rng rng(derive_seed(seed, {kTagCertificate, static_cast<std::uint64_t>(i)}));
    const double radius = basin ? TheoryBounds::make(N, W).basin_radius
                                : 1.0 / std::sqrt(static_cast<double>(N));
    const BallSample s = sample_ball(N, W, radius, rng);
    tally(r, check(s), describe(s, seed, i));
  }
  return r;
}

}  // namespace

CertificateResult certify_gradient_bound(int samples, std::uint64_t seed,
                                         const std::vector<int>& Ns, const std::vector<int>& Ws) {
  return sample_certificate("gradient_bound", samples, seed, Ns, Ws, false, [](const BallSample& s) {
    const double lhs = gradient_at(s).grad.norm();
    const double rhs = 8.0 / s.cfg.L * s.cfg.W() * s.cfg.W() * std::sqrt(double(s.cfg.N)) * s.d.d;
    return upper_margin(lhs, rhs);
  });
}

CertificateResult certify_regularity(int samples, std::uint64_t seed, const std::vector<int>& Ns,
                                     const std::vector<int>& Ws) {
  return sample_certificate("regularity_inner_product", samples, seed, Ns, Ws, true,
                            [](const BallSample& s) {
                              const double lhs = gradient_at(s).inner;
                              const double rhs = s.cfg.W() * s.d.d * s.d.d / (2.0 * s.cfg.N);
                              return upper_margin(rhs, lhs);
                            });
}

CertificateResult certify_regularity_condition(int samples, std::uint64_t seed,
                                               const std::vector<int>& Ns,
                                               const std::vector<int>& Ws) {
  return sample_certificate("regularity_condition", samples, seed, Ns, Ws, true,
                            [](const BallSample& s) {
                              const TheoryBounds b = TheoryBounds::make(s.cfg.N, s.cfg.W());
                              const GradientAtSample g = gradient_at(s);
                              const double rhs = s.d.d * s.d.d / b.alpha + g.grad.squaredNorm() / b.beta;
                              return upper_margin(rhs, g.inner);
                            });
}

CertificateResult certify_init_bound(int samples, std::uint64_t seed) {
  static const int kPrimes[] = {11, 13, 17, 19, 23, 29, 31};
  CertificateResult r;
  r.name = "init_bound";
  r.note = "unit-norm complex x with ||x||_inf^2 <= B/N, B = N/(2(N-2W+1))";
  for (int i = 0; i < samples; ++i) {
    Rng rng(derive_seed(seed, {kTagCertificate, 1000003, static_cast<std::uint64_t>(i)}));
    const int N = kPrimes[i % 7];
    // The flatness premise with unit norm needs W >= (N + 2) / 4; keep one
    // step of slack and stop short of W = (N + 1) / 2 where the bound is 0.
    const int w_lo = (N + 2 + 3) / 4 + 1;
    const int w_hi = (N - 1) / 2;
    const int W = w_lo + static_cast<int>(rng.next_u64() % static_cast<std::uint64_t>(w_hi - w_lo + 1));
    const double B = N / (2.0 * (N - 2 * W + 1));
    const double cap2 = B / N;
    Eigen::VectorXcd v(N);
    double spread = 0.5;
    for (int attempt = 0;; ++attempt) {
      for (int n = 0; n < N; ++n) {
        const double mag = 1.0 + spread * (2.0 * rng.uniform() - 1.0);
        v[n] = std::polar(mag, 2.0 * M_PI * rng.uniform());
      }
      v.normalize();
      if (v.cwiseAbs2().maxCoeff() <= cap2) break;
      if (attempt % 20 == 19) spread *= 0.5;
    }
    const Signal x = Signal::from_complex(v);
    const ProblemConfig cfg = make_config(N, WindowSpec::rectangular(N, W), 1, false);
    const InitResult init = ls_init_L1(measure(x, cfg), cfg);
    const double d = distance(init.estimate, x).d;
    const double rhs = x.norm() * x.norm() * TheoryBounds::make(N, W, B).init_bound;
    std::ostringstream os;
    os << "N=" << N << " W=" << W << " sample=" << i << " seed=" << seed << " d2=" << d * d;
    tally(r, upper_margin(d * d, rhs), os.str());
  }
  return r;
}

RateCheck certify_rate(int N, int W, int iterations, std::uint64_t seed) {
  RateCheck out;
  out.result.name = "geometric_rate";
  Rng rng(derive_seed(seed, {kTagCertificate, 2000003}));
  const TheoryBounds b = TheoryBounds::make(N, W);
  const BallSample s = sample_ball(N, W, 0.9 * b.basin_radius, rng);
  GdOptions opts;
  opts.mu = 2.0 / b.beta;
  opts.scaling = StepScaling::kAbsolute;
  opts.B = 1.0 / std::sqrt(static_cast<double>(N));
  opts.max_iter = iterations;
  opts.stop_tol = 0.0;
  opts.record_trace = true;
  const MeasurementSet Y = measure(s.x, s.cfg);
  const RecoveryResult r = gd_recover(Y, s.cfg, Signal::from_real(s.z), opts, &s.x);
  const double xn2 = s.x.norm() * s.x.norm();
  for (double e : r.record.error_trace) out.d2.push_back(e * e * xn2);
  out.theory_factor = 1.0 - 2.0 * opts.mu / b.alpha;
  const double d0 = out.d2.front();
  for (std::size_t k = 1; k < out.d2.size(); ++k) {
    const double rhs = std::pow(out.theory_factor, static_cast<double>(k)) * d0;
    std::ostringstream os;
    os << "N=" << N << " W=" << W << " iteration=" << k << " d2=" << out.d2[k] << " bound=" << rhs;
    tally(out.result, upper_margin(out.d2[k], rhs), os.str());
  }
  const std::size_t K = out.d2.size() - 1;
  out.observed_factor = K > 0 && d0 > 0.0 ? std::pow(out.d2.back() / d0, 1.0 / K) : 1.0;
  std::ostringstream note;
  note.precision(17);
  note << "theory factor " << out.theory_factor << ", observed " << out.observed_factor;
  out.result.note = note.str();
  return out;
}

CertificateResult certify_init_in_basin(int samples, std::uint64_t seed) {
  static const int kPrimes[] = {5, 7, 11, 13, 17, 19, 23};
  CertificateResult r;
  r.name = "init_in_basin";
  for (int i = 0; i < samples; ++i) {
    const int N = kPrimes[i % 7];
    int W = 2;
    while (2.0 * W - 1.0 + 1.0 / (128.0 * std::pow(W, 4)) < N) ++W;
    Rng rng(derive_seed(seed, {kTagCertificate, 3000017, static_cast<std::uint64_t>(i)}));
    const Signal x = random_sign_signal(N, rng);
    const ProblemConfig cfg = make_config(N, WindowSpec::rectangular(N, W), 1, true);
    const InitResult init = ls_init_L1(measure(x, cfg), cfg);
    const double d = distance(init.estimate, x).d;
    std::ostringstream os;
    os << "N=" << N << " W=" << W << " sample=" << i << " d=" << d;
    tally(r, upper_margin(d, TheoryBounds::make(N, W).basin_radius), os.str());
  }
  return r;
}

CertificateReport run_theory_certificates(const ExperimentSpec& spec) {
  spec.validate();
  const int samples = spec.effective_trials();
  const int small = std::max(1, samples / 10);
  CertificateReport report;
  report.results.push_back(certify_gradient_bound(samples, spec.seed, spec.N, spec.W));
  report.results.push_back(certify_regularity(samples, spec.seed, spec.N, spec.W));
  report.results.push_back(certify_regularity_condition(samples, spec.seed, spec.N, spec.W));
  report.results.push_back(certify_init_bound(small, spec.seed));
  report.results.push_back(certify_rate(9, 3, 500, spec.seed).result);
  report.results.push_back(certify_init_in_basin(std::max(7, small / 5), spec.seed));
  return report;
}

// ---------------------------------------------------------------------------
// CSV

void write_csv(std::ostream& out, const std::vector<InitErrorRow>& rows) {
  out << "W,L,interp,mean_error,std_error,trials\n";
  for (const auto& r : rows) {
    out << r.W << ',' << r.L << ',' << to_string(r.interp) << ',' << fmt(r.mean_error) << ','
        << fmt(r.std_error) << ',' << r.trials << '\n';
  }
}

void write_csv(std::ostream& out, const std::vector<BasinRow>& rows) {
  out << "sigma,L,mean_final_error,converged_fraction\n";
  for (const auto& r : rows) {
    out << fmt(r.sigma) << ',' << r.L << ',' << fmt(r.mean_final_error) << ','
        << fmt(r.converged_fraction) << '\n';
  }
}

void write_csv(std::ostream& out, const std::vector<SnrRow>& rows) {
  out << "snr_db,L,method,mean_error\n";
  for (const auto& r : rows) {
    out << fmt(r.snr_db) << ',' << r.L << ',' << to_string(r.method) << ',' << fmt(r.mean_error)
        << '\n';
  }
}

void write_csv(std::ostream& out, const std::vector<SurfacePoint>& rows) {
  out << "z1,z2,f\n";
  for (const auto& r : rows) out << fmt(r.z1) << ',' << fmt(r.z2) << ',' << fmt(r.f) << '\n';
}

void write_csv(std::ostream& out, const std::vector<SpectrumRow>& rows) {
  out << "window,param,k,magnitude\n";
  for (const auto& r : rows) {
    out << to_string(r.window) << ',' << fmt(r.param) << ',' << r.k << ',' << fmt(r.magnitude)
        << '\n';
  }
}

void write_csv(std::ostream& out, const std::vector<BandwidthRow>& rows) {
  out << "window,param,bandwidth_3db\n";
  for (const auto& r : rows) {
    out << to_string(r.window) << ',' << fmt(r.param) << ',' << r.bandwidth_3db << '\n';
  }
}

void write_csv(std::ostream& out, const CertificateReport& report) {
  out << "certificate,samples,violations,worst_margin,status,counterexample,note\n";
  for (const auto& r : report.results) {
    out << r.name << ',' << r.samples << ',' << r.violations << ',' << fmt(r.worst_margin) << ','
        << (r.passed() ? "pass" : "fail") << ",\"" << r.counterexample << "\",\"" << r.note
        << "\"\n";
  }
}

void write_overlay_csv(std::ostream& out, const SingleExampleCell& cell) {
  out << "n,truth,init,estimate\n";
  for (int n = 0; n < cell.truth.length(); ++n) {
    out << n << ',' << fmt(cell.truth[n].real()) << ',' << fmt(cell.init[n].real()) << ','
        << fmt(cell.estimate[n].real()) << '\n';
  }
}

void write_normalized_trace_csv(std::ostream& out, const TrialRecord& record) {
  TrialRecord scaled = record;
  if (!scaled.loss_trace.empty() && scaled.loss_trace.front() > 0.0) {
    const double f0 = scaled.loss_trace.front();
    for (double& v : scaled.loss_trace) v /= f0;
  }
  write_trace_csv(out, scaled);
}

// ---------------------------------------------------------------------------
// Files

std::string manifest_json(const ExperimentSpec& spec, const std::vector<std::string>& outputs) {
  using nlohmann::json;
  auto numbers = [](const std::vector<double>& v) {
    json a = json::array();
    for (double d : v) {
      if (std::isinf(d)) {
        a.push_back(d > 0 ? "inf" : "-inf");
      } else {
        a.push_back(d);
      }
    }
    return a;
  };
  json interp = json::array();
  for (auto k : spec.interp) interp.push_back(to_string(k));
  json doc = {
      {"experiment", to_string(spec.kind)},
      {"artifact_version", artifact_version()},
      {"seed", spec.seed},
      {"quick", spec.quick},
      {"trials", spec.effective_trials()},
      {"grid",
       {{"N", spec.N},
        {"W", spec.W},
        {"sigma", numbers(spec.sigma)},
        {"L", spec.L},
        {"snr_db", numbers(spec.snr_db)},
        {"mu", numbers(spec.mu)},
        {"interp", interp}}},
      {"solver",
       {{"max_iter", spec.max_iter},
        {"gla_max_iter", spec.gla_max_iter},
        {"relative_target", spec.relative_target},
        {"step_scaling", to_string(GdOptions{}.scaling)}}},
  };
  json notes = json::array();
  switch (spec.kind) {
    case ExperimentKind::kBasin:
      notes.push_back(
          "L = 1 is the reference configuration; L = 2 and L = 4 are run with the same "
          "settings");
      notes.push_back("rectangular window; converged means final relative error <= 1e-4");
      break;
    case ExperimentKind::kInitErrorSweep:
      notes.push_back("Gaussian window with sigma = W / 3, support [0, W - 1]");
      break;
    case ExperimentKind::kSnrSweep:
      notes.push_back("both methods start from the least-squares initialization");
      break;
    default:
      break;
  }
  notes.push_back("hops that do not divide N use ceil(N / L) frames");
  doc["notes"] = notes;
  doc["outputs"] = outputs;
  return doc.dump(2) + "\n";
}

std::vector<std::string> run_experiment(const ExperimentSpec& spec, const std::string& out_dir,
                                        CertificateReport* report) {
  spec.validate();
  namespace fs = std::filesystem;
  fs::create_directories(out_dir);
  std::vector<std::string> names;
  auto emit = [&](const std::string& name, auto&& writer) {
    std::ostringstream os;
    writer(os);
    io::write_text_file((fs::path(out_dir) / name).string(), os.str());
    names.push_back(name);
  };

  switch (spec.kind) {
    case ExperimentKind::kInitErrorSweep: {
      const auto rows = run_init_error_sweep(spec);
      emit("init_error.csv", [&](std::ostream& os) { write_csv(os, rows); });
      break;
    }
    case ExperimentKind::kBasin: {
      const auto rows = run_basin_experiment(spec);
      emit("basin.csv", [&](std::ostream& os) { write_csv(os, rows); });
      break;
    }
    case ExperimentKind::kSnrSweep: {
      const auto rows = run_snr_sweep(spec);
      emit("snr.csv", [&](std::ostream& os) { write_csv(os, rows); });
      break;
    }
    case ExperimentKind::kSingleExample: {
      for (const auto& cell : run_single_example(spec)) {
        const std::string stem = "example_W" + std::to_string(cell.W) + "_L" + std::to_string(cell.L);
        emit(stem + "_trace.csv", [&](std::ostream& os) { write_normalized_trace_csv(os, cell.record); });
        emit(stem + "_overlay.csv", [&](std::ostream& os) { write_overlay_csv(os, cell); });
        emit(stem + "_estimate.json",
             [&](std::ostream& os) { os << io::signal_to_json(cell.estimate); });
      }
      break;
    }
    case ExperimentKind::kLossSurface: {
      const int N = spec.N.front();
      Eigen::VectorXd xv = Eigen::VectorXd::Zero(N);
      xv.head(std::min(N, 2)).setConstant(0.2);
      const Signal x = Signal::from_real(xv);
      const ProblemConfig cfg = make_config(N, WindowSpec::rectangular(N, spec.W.front()),
                                            spec.L.empty() ? 1 : spec.L.front(), true);
      std::vector<double> grid;
      for (int i = 0; i <= 80; ++i) grid.push_back(-0.4 + 0.01 * i);
      const auto rows = sample_loss_surface(x, cfg, grid);
      emit("surface.csv", [&](std::ostream& os) { write_csv(os, rows); });
      const auto points = find_stationary_points(x, cfg, -0.4, 0.4, spec.quick ? 4e-3 : 1e-3);
      emit("stationary.csv", [&](std::ostream& os) {
        os << "z1,z2,f,kind\n";
        for (const auto& p : points) {
          os << fmt(p.z1) << ',' << fmt(p.z2) << ',' << fmt(p.f) << ',' << to_string(p.kind) << '\n';
        }
      });
      break;
    }
    case ExperimentKind::kWindowSpectrum: {
      const auto rows = run_window_spectrum(spec);
      emit("window_spectrum.csv", [&](std::ostream& os) { write_csv(os, rows); });
      const auto bw = window_bandwidths(spec);
      emit("window_bandwidth.csv", [&](std::ostream& os) { write_csv(os, bw); });
      break;
    }
    case ExperimentKind::kTheoryCertificates: {
      const CertificateReport rep = run_theory_certificates(spec);
      emit("certificates.csv", [&](std::ostream& os) { write_csv(os, rep); });
      if (report) *report = rep;
      break;
    }
  }
  const std::string manifest = manifest_json(spec, names);
  io::write_text_file((fs::path(out_dir) / "manifest.json").string(), manifest);
  names.push_back("manifest.json");
  return names;
}

}  // namespace stftpr
