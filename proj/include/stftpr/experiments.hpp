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
// Experiment drivers and numerical certificates. Every driver is a pure
// function of its ExperimentSpec: trial t of every grid cell draws its
// random quantities from seeds derived from (spec.seed, t, ...) so reruns
// produce identical tables, with or without worker threads.

#ifndef STFTPR_EXPERIMENTS_HPP_
#define STFTPR_EXPERIMENTS_HPP_

#include <cstdint>
#include <ostream>
#include <string>
#include <vector>

#include "stftpr/init.hpp"
#include "stftpr/model.hpp"
#include "stftpr/solver.hpp"

namespace stftpr {

const char* artifact_version();

enum class ExperimentKind {
  kInitErrorSweep,
  kBasin,
  kSnrSweep,
  kSingleExample,
  kLossSurface,
  kWindowSpectrum,
  kTheoryCertificates,
};

std::string to_string(ExperimentKind kind);

struct ExperimentSpec {
  ExperimentKind kind = ExperimentKind::kInitErrorSweep;
  std::vector<int> N;
  std::vector<int> W;          // window lengths (Gaussian: sigma = W / 3)
  std::vector<double> sigma;   // basin perturbation sizes; Gaussian widths for spectra
  std::vector<int> L;
  std::vector<double> snr_db;  // +inf for noiseless
  std::vector<double> mu;
  std::vector<InterpolationKind> interp;
  int trials = 1;
  std::uint64_t seed = 0;
  bool quick = false;
  int jobs = 1;
  int max_iter = 100000;     // gradient descent
  int gla_max_iter = 5000;
  double relative_target = 1e-24;

  /// Defaults mirroring the published settings. In quick mode trial counts
  /// are divided by 10 (at least 1); grids are unchanged.
  static ExperimentSpec defaults(ExperimentKind kind, bool quick = false);

  int effective_trials() const;
  void validate() const;
};

// ---------------------------------------------------------------------------
// Tables

struct InitErrorRow {
  int W = 0;
  int L = 0;
  InterpolationKind interp = InterpolationKind::kCubic;
  double mean_error = 0.0;
  double std_error = 0.0;
  int trials = 0;
};

struct BasinRow {
  double sigma = 0.0;
  int L = 0;
  double mean_final_error = 0.0;  // +inf when any trial diverged
  double converged_fraction = 0.0;
  int trials = 0;
};

struct SnrRow {
  double snr_db = 0.0;
  int L = 0;
  Method method = Method::kGd;
  double mean_error = 0.0;
  int trials = 0;
};

struct SingleExampleCell {
  int W = 0;
  int L = 0;
  Signal truth;
  Signal init;      // aligned to the truth's global phase
  Signal estimate;  // aligned to the truth's global phase
  TrialRecord record;
  double init_error = 0.0;
  double final_error = 0.0;
};

struct SurfacePoint {
  double z1 = 0.0;
  double z2 = 0.0;
  double f = 0.0;
};

enum class StationaryKind { kMinimum, kSaddle, kMaximum };

std::string to_string(StationaryKind kind);

struct StationaryPoint {
  double z1 = 0.0;
  double z2 = 0.0;
  double f = 0.0;
  StationaryKind kind = StationaryKind::kSaddle;
};

struct SpectrumRow {
  WindowKind window = WindowKind::kRectangular;
  double param = 0.0;  // W for rectangular, sigma for Gaussian
  int k = 0;
  double magnitude = 0.0;
};

struct BandwidthRow {
  WindowKind window = WindowKind::kRectangular;
  double param = 0.0;
  int bandwidth_3db = 0;
};

// ---------------------------------------------------------------------------
// Drivers

std::vector<InitErrorRow> run_init_error_sweep(const ExperimentSpec& spec);
std::vector<BasinRow> run_basin_experiment(const ExperimentSpec& spec);
std::vector<SnrRow> run_snr_sweep(const ExperimentSpec& spec);
std::vector<SingleExampleCell> run_single_example(const ExperimentSpec& spec);

/// Loss on a square grid over the first two coordinates, the remaining ones
/// held at x. Row-major in (z1, z2).
std::vector<SurfacePoint> sample_loss_surface(const Signal& x, const ProblemConfig& cfg,
                                              const std::vector<double>& grid);

/// Stationary points of the two-coordinate restriction inside [lo, hi]^2:
/// grid cells where the restricted gradient is locally smallest, refined by
/// Newton steps and classified by the Hessian.
std::vector<StationaryPoint> find_stationary_points(const Signal& x, const ProblemConfig& cfg,
                                                    double lo, double hi, double resolution);

/// |DFT(g)[k]| for k < N/2.
Eigen::VectorXd window_spectrum(const WindowSpec& window);

/// Number of leading bins whose magnitude stays above |G[0]| / sqrt(2).
int bandwidth_3db(const Eigen::VectorXd& magnitudes);

std::vector<SpectrumRow> run_window_spectrum(const ExperimentSpec& spec);
std::vector<BandwidthRow> window_bandwidths(const ExperimentSpec& spec);

// ---------------------------------------------------------------------------
// Certificates

struct TheoryBounds {
  double alpha = 0.0;         // 4N / W
  double beta = 0.0;          // 256 N^2 W^3
  double basin_radius = 0.0;  // 1 / (8 sqrt(N) W^2)
  double init_bound = 0.0;    // 1 - sqrt(1 - 2B(N - 2W + 1)/N), times ||x||^2

  /// Rectangular window, L = 1. B is the flatness level of the
  /// initialization bound; the default is its largest admissible value
  /// N / (2 (N - 2W + 1)) (or 1 when 2W - 1 >= N).
  static TheoryBounds make(int N, int W, double B = 0.0);
};

struct CertificateResult {
  std::string name;
  int samples = 0;
  int violations = 0;
  double worst_margin = 0.0;  // min over samples of (rhs - lhs) / |rhs|
  std::string counterexample; // first violating instance, empty if none
  std::string note;

  bool passed() const { return samples > 0 && violations == 0; }
};

struct CertificateReport {
  std::vector<CertificateResult> results;
  bool all_passed() const;
};

/// ||grad f(z)|| <= (8/L) W^2 sqrt(N) d(x, z) for +-1/sqrt(N) real x,
/// ||z||_inf <= 1/sqrt(N), d <= 1/sqrt(N); rectangular window, L = 1.
CertificateResult certify_gradient_bound(int samples, std::uint64_t seed,
                                         const std::vector<int>& Ns, const std::vector<int>& Ws);

/// <grad f(z), z - x e^{j phi}> >= W d^2 / (2N) for d <= basin radius.
CertificateResult certify_regularity(int samples, std::uint64_t seed,
                                     const std::vector<int>& Ns, const std::vector<int>& Ws);

/// <grad f(z), z - x e^{j phi}> >= d^2 / alpha + ||grad f||^2 / beta.
CertificateResult certify_regularity_condition(int samples, std::uint64_t seed,
                                               const std::vector<int>& Ns,
                                               const std::vector<int>& Ws);

/// d^2(x0, x) <= ||x||^2 (1 - sqrt(1 - 2B(N-2W+1)/N)) with B at its cap, for
/// flat complex x and the least-squares initialization x0 (prime N <= 31).
CertificateResult certify_init_bound(int samples, std::uint64_t seed);

struct RateCheck {
  CertificateResult result;
  double theory_factor = 0.0;    // 1 - 2 mu / alpha
  double observed_factor = 0.0;  // geometric mean of d^2_k / d^2_{k-1}
  std::vector<double> d2;        // d^2 of every iterate, starting at x0
};

/// Gradient descent with B = 1/sqrt(N), mu = 2/beta from a start inside the
/// basin; checks d^2_k <= (1 - 2 mu/alpha)^k d^2_0 at every iterate.
RateCheck certify_rate(int N, int W, int iterations, std::uint64_t seed);

/// When 2W - 1 + 1/(128 W^4) >= N (prime N, rectangular W), the
/// least-squares initialization of a +-1/sqrt(N) signal lies in the basin.
CertificateResult certify_init_in_basin(int samples, std::uint64_t seed);

CertificateReport run_theory_certificates(const ExperimentSpec& spec);

// ---------------------------------------------------------------------------
// Output

void write_csv(std::ostream& out, const std::vector<InitErrorRow>& rows);
void write_csv(std::ostream& out, const std::vector<BasinRow>& rows);
void write_csv(std::ostream& out, const std::vector<SnrRow>& rows);
void write_csv(std::ostream& out, const std::vector<SurfacePoint>& rows);
void write_csv(std::ostream& out, const std::vector<SpectrumRow>& rows);
void write_csv(std::ostream& out, const std::vector<BandwidthRow>& rows);
void write_csv(std::ostream& out, const CertificateReport& report);

/// Columns n,truth,init,estimate (real parts).
void write_overlay_csv(std::ostream& out, const SingleExampleCell& cell);

/// Trace with the loss divided by its first value.
void write_normalized_trace_csv(std::ostream& out, const TrialRecord& record);

/// Runs the experiment, writes its CSV files and manifest.json under
/// out_dir (created if missing) and returns the written paths. The
/// certificate run returns its report through `report` when non-null.
std::vector<std::string> run_experiment(const ExperimentSpec& spec, const std::string& out_dir,
                                        CertificateReport* report = nullptr);

std::string manifest_json(const ExperimentSpec& spec, const std::vector<std::string>& outputs);

}  // namespace stftpr

#endif  // STFTPR_EXPERIMENTS_HPP_
