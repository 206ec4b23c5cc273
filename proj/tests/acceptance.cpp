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
// Acceptance suite. Prints one PASS/FAIL line per criterion and exits
// nonzero if any criterion fails.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iterator>
#include <map>
#include <sstream>
#include <string>
#include <vector>

#include "oracles.hpp"
#include "stftpr/experiments.hpp"
#include "stftpr/fft.hpp"
#include "stftpr/forward.hpp"
#include "stftpr/init.hpp"
#include "stftpr/solver.hpp"

using namespace stftpr;
namespace fs = std::filesystem;

namespace {

// Tolerances.
constexpr double kExactTol = 1e-8;
constexpr double kExactSeconds = 5.0;
constexpr double kEigenTol = 1e-10;
constexpr double kConvergedTol = 1e-4;  // used inside the basin driver
constexpr double kBasinSeconds = 600.0;
constexpr double kOracleTol = 1e-10;
constexpr double kFdTol = 1e-5;
constexpr double kLowpassTol = 1e-10;

struct Verdict {
  bool pass = false;
  std::string detail;
};

using Clock = std::chrono::steady_clock;

double seconds_since(Clock::time_point t0) {
  return std::chrono::duration<double>(Clock::now() - t0).count();
}

std::string num(double v, int digits = 3) {
  char buf[40];
  std::snprintf(buf, sizeof(buf), "%.*g", digits, v);
  return buf;
}

ProblemConfig rect_config(int N, int W, int L, bool real) {
  ProblemConfig cfg;
  cfg.N = N;
  cfg.window = WindowSpec::rectangular(N, W);
  cfg.L = L;
  cfg.real_signal = real;
  cfg.validate();
  return cfg;
}

Signal complex_signal(int N, std::uint64_t seed) {
  Rng rng(seed);
  return random_gaussian_signal(N, false, rng);
}

Verdict exact_ls() {
  const auto t0 = Clock::now();
  double worst = 0.0;
  for (int N : {11, 13, 17, 23}) {
    const ProblemConfig cfg = rect_config(N, (N + 2) / 2, 1, false);
    for (std::uint64_t s = 0; s < 20; ++s) {
      const Signal x = complex_signal(N, derive_seed(1, {static_cast<std::uint64_t>(N), s}));
      worst = std::max(worst, relative_error(ls_init(measure(x, cfg), cfg).estimate, x));
    }
  }
  const double secs = seconds_since(t0);
  return {worst <= kExactTol && secs < kExactSeconds,
          "worst_error=" + num(worst) + " seconds=" + num(secs)};
}

Verdict recursive() {
  double worst = 0.0;
  for (int N : {5, 7, 11, 13, 17, 19, 23}) {
    const ProblemConfig cfg = rect_config(N, 3, 1, false);
    for (std::uint64_t s = 0; s < 20; ++s) {
      // Resample until every entry stays away from zero.
      Rng rng(derive_seed(2, {static_cast<std::uint64_t>(N), s}));
      Signal x;
      do {
        x = random_gaussian_signal(N, false, rng);
      } while (x.values().cwiseAbs().minCoeff() < 0.05 * x.norm() / std::sqrt(N));
      worst = std::max(worst, relative_error(recursive_recovery(measure(x, cfg), cfg), x));
    }
  }
  return {worst <= kExactTol, "worst_error=" + num(worst)};
}

Verdict unit_modulus() {
  const int N = 13;
  const ProblemConfig cfg = rect_config(N, 3, 1, false);
  double worst_err = 0.0, worst_eig = 0.0;
  for (std::uint64_t s = 0; s < 20; ++s) {
    Rng rng(derive_seed(3, {s}));
    Eigen::VectorXcd v(N);
    for (int n = 0; n < N; ++n) v[n] = std::polar(1.0 / std::sqrt(N), 2.0 * M_PI * rng.uniform());
    const Signal x = Signal::from_complex(v);
    for (int M : {1, 2}) {
      const UnitModulusResult r = unit_modulus_init(measure(x, cfg), cfg, M);
      worst_err = std::max(worst_err, relative_error(r.estimate, x));
      worst_eig = std::max(worst_eig, std::abs(r.eigenvalue - 2.0 / N));
    }
  }
  return {worst_err <= kExactTol && worst_eig <= kEigenTol,
          "worst_error=" + num(worst_err) + " eigenvalue_dev=" + num(worst_eig)};
}

Verdict from_certificate(const CertificateResult& r) {
  return {r.passed(), "samples=" + std::to_string(r.samples) + " violations=" +
                          std::to_string(r.violations) + " worst_margin=" + num(r.worst_margin)};
}

Verdict bound_certificates() {
  const ExperimentSpec spec = ExperimentSpec::defaults(ExperimentKind::kTheoryCertificates);
  const CertificateResult a = certify_gradient_bound(1000, 11, spec.N, spec.W);
  const CertificateResult b = certify_regularity(1000, 12, spec.N, spec.W);
  const Verdict va = from_certificate(a);
  const Verdict vb = from_certificate(b);
  return {va.pass && vb.pass, "gradient: " + va.detail + "; regularity: " + vb.detail};
}

Verdict rate() {
  const RateCheck r = certify_rate(9, 3, 500, 13);
  Verdict v = from_certificate(r.result);
  v.detail += " theory_factor=" + num(r.theory_factor, 9) +
              " observed_factor=" + num(r.observed_factor, 9);
  return v;
}

Verdict basin() {
  const auto t0 = Clock::now();
  ExperimentSpec spec = ExperimentSpec::defaults(ExperimentKind::kBasin, /*quick=*/true);
  spec.seed = 14;
  const auto rows = run_basin_experiment(spec);
  const double secs = seconds_since(t0);
  bool ok = secs < kBasinSeconds;
  std::ostringstream detail;
  for (const BasinRow& r : rows) {
    const double limit = r.L == 4 ? 0.25 : 0.3;
    if (r.sigma > limit + 1e-12) continue;
    if (r.converged_fraction < 1.0) {
      ok = false;
      detail << "sigma=" << r.sigma << ",L=" << r.L << " converged=" << r.converged_fraction << " ";
    }
  }
  detail << "converged_tol=" << num(kConvergedTol) << " seconds=" << num(secs);
  return {ok, detail.str()};
}

Verdict snr() {
  ExperimentSpec spec = ExperimentSpec::defaults(ExperimentKind::kSnrSweep);
  spec.seed = 15;
  spec.snr_db = {0.0, 5.0};
  spec.trials = 20;
  std::map<std::pair<double, int>, std::map<Method, double>> cells;
  for (const SnrRow& r : run_snr_sweep(spec)) cells[{r.snr_db, r.L}][r.method] = r.mean_error;
  bool ok = cells.size() == 4;
  std::ostringstream detail;
  for (auto& [key, m] : cells) {
    const bool cell_ok = m[Method::kGd] <= m[Method::kGla];
    ok = ok && cell_ok;
    detail << "snr=" << key.first << ",L=" << key.second << " gd=" << num(m[Method::kGd])
           << " gla=" << num(m[Method::kGla]) << " ";
  }
  return {ok, detail.str()};
}

Verdict oracles() {
  double worst = 0.0;
  double worst_fd = 0.0;
  std::vector<ProblemConfig> cfgs = {rect_config(12, 5, 3, false), rect_config(10, 4, 1, false),
                                     rect_config(12, 6, 2, false)};
  ProblemConfig gauss;
  gauss.N = 11;
  gauss.window = WindowSpec::gaussian(11, 1.4);
  cfgs.push_back(gauss);
  std::uint64_t seed = 100;
  for (const ProblemConfig& cfg : cfgs) {
    const Signal x = complex_signal(cfg.N, seed++);
    const Signal z = complex_signal(cfg.N, seed++);
    const Eigen::VectorXd& g = cfg.window.values;
    const MeasurementSet Y = measure(x, cfg);

    const Eigen::MatrixXcd X = oracle::stft(x.values(), g, cfg.L);
    worst = std::max(worst, (stft(x, cfg) - X).cwiseAbs().maxCoeff() / X.cwiseAbs().maxCoeff());
    const Eigen::MatrixXcd Yo = oracle::transform_y(Y.Z);
    worst = std::max(worst, (Y.Y - Yo).cwiseAbs().maxCoeff() / Yo.cwiseAbs().maxCoeff());
    for (int m = 0; m < cfg.frames(); ++m) {
      for (int l = -(cfg.W() - 1); l <= cfg.W() - 1; ++l) {
        const Eigen::MatrixXd H = oracle::dense_h(g, cfg.L, m, l);
        const Complex ref = z.values().dot(H.cast<Complex>() * z.values());
        worst = std::max(worst, std::abs(apply_h(z, m, l, cfg) - ref) / (1.0 + std::abs(ref)));
      }
    }
    const double fo = oracle::loss(z.values(), Y.Y, g, cfg.W(), cfg.L);
    worst = std::max(worst, std::abs(loss(z, Y, cfg) - fo) / fo);

    // Gradient against the dense loss, by central differences.
    const Eigen::VectorXcd grad = gradient(z, Y, cfg);
    const double h = 1e-6;
    for (int n = 0; n < cfg.N; ++n) {
      for (Complex dir : {Complex(1.0, 0.0), Complex(0.0, 1.0)}) {
        Eigen::VectorXcd e = Eigen::VectorXcd::Zero(cfg.N);
        e[n] = dir;
        const double fd = (oracle::loss(z.values() + h * e, Y.Y, g, cfg.W(), cfg.L) -
                           oracle::loss(z.values() - h * e, Y.Y, g, cfg.W(), cfg.L)) /
                          (2.0 * h);
        const double an = (std::conj(grad[n]) * dir).real();
        worst_fd = std::max(worst_fd, std::abs(fd - an) / std::max(1.0, std::abs(an)));
      }
    }
  }
  return {worst <= kOracleTol && worst_fd <= kFdTol,
          "worst_dev=" + num(worst) + " worst_fd=" + num(worst_fd)};
}

Verdict lowpass() {
  double worst = 0.0;
  for (int N : {16, 32}) {
    for (int L : {2, 4}) {
      const int band = N / L;
      const int start = N - band / 2;
      Rng rng(derive_seed(16, {static_cast<std::uint64_t>(N), static_cast<std::uint64_t>(L)}));
      Eigen::VectorXcd spectrum = Eigen::VectorXcd::Zero(N);
      for (int i = 0; i < band; ++i) spectrum[(start + i) % N] = Complex(rng.normal(), rng.normal());
      const CirculantOperator G(fft::inverse(spectrum));
      const Eigen::VectorXcd y = G.apply(random_gaussian_signal(N, false, rng).values());
      Eigen::VectorXcd sub(band);
      for (int m = 0; m < band; ++m) sub[m] = y[m * L];
      const Eigen::VectorXcd up =
          upsample_diagonal(sub, InterpolationFilter::ideal_lowpass(N, L, start), N);
      worst = std::max(worst, (up - y).norm() / y.norm());
    }
  }
  return {worst <= kLowpassTol, "worst_rel_dev=" + num(worst)};
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  return {std::istreambuf_iterator<char>(in), std::istreambuf_iterator<char>()};
}

Verdict determinism() {
  const fs::path root = fs::temp_directory_path() / "stftpr_acceptance_determinism";
  bool ok = true;
  std::ostringstream detail;
  for (ExperimentKind kind :
       {ExperimentKind::kInitErrorSweep, ExperimentKind::kBasin, ExperimentKind::kSnrSweep,
        ExperimentKind::kSingleExample, ExperimentKind::kLossSurface,
        ExperimentKind::kWindowSpectrum, ExperimentKind::kTheoryCertificates}) {
    ExperimentSpec spec = ExperimentSpec::defaults(kind, /*quick=*/true);
    spec.seed = 17;
    std::map<std::string, std::string> runs[2];
    for (int r = 0; r < 2; ++r) {
      ExperimentSpec s = spec;
      s.jobs = r + 1;
      const fs::path dir = root / (to_string(kind) + "_" + std::to_string(r));
      fs::remove_all(dir);
      for (const std::string& path : run_experiment(s, dir.string())) {
        if (fs::path(path).extension() == ".csv") runs[r][fs::path(path).filename().string()] = slurp(path);
      }
    }
    const bool same = !runs[0].empty() && runs[0] == runs[1];
    ok = ok && same;
    detail << to_string(kind) << (same ? "=same " : "=DIFFERENT ");
  }
  fs::remove_all(root);
  return {ok, detail.str()};
}

}  // namespace

int main() {
  const std::vector<std::pair<std::string, std::function<Verdict()>>> criteria = {
      {"exact_least_squares", exact_ls},
      {"recursive_recovery", recursive},
      {"unit_modulus_recovery", unit_modulus},
      {"init_bound_certificate", [] { return from_certificate(certify_init_bound(100, 10)); }},
      {"gradient_and_regularity_certificates", bound_certificates},
      {"convergence_rate", rate},
      {"basin_of_attraction", basin},
      {"snr_gd_vs_gla", snr},
      {"oracle_equivalence", oracles},
      {"lowpass_expansion_identity", lowpass},
      {"determinism", determinism},
  };
  int failures = 0;
  for (const auto& [name, check] : criteria) {
    Verdict v;
    const auto t0 = Clock::now();
    try {
      v = check();
    } catch (const std::exception& e) {
      v = {false, std::string("exception: ") + e.what()};
    }
    failures += !v.pass;
    std::printf("%s %s (%.1fs) %s\n", v.pass ? "PASS" : "FAIL", name.c_str(), seconds_since(t0),
                v.detail.c_str());
    std::fflush(stdout);
  }
  return failures == 0 ? 0 : 1;
}
