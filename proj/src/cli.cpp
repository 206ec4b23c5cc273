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

#include "stftpr/cli.hpp"

#include <cmath>
#include <cstdint>
#include <filesystem>
#include <iostream>
#include <map>
#include <optional>
#include <sstream>

#include "CLI11.hpp"
#include "json.hpp"
#include "stftpr/experiments.hpp"
#include "stftpr/forward.hpp"
#include "stftpr/init.hpp"
#include "stftpr/io.hpp"
#include "stftpr/solver.hpp"

namespace stftpr::cli {

namespace {

namespace fs = std::filesystem;

struct ProblemFlags {
  int n = 23;
  std::string window = "rect";
  int w = 7;
  std::optional<double> sigma;
  int l = 1;
  std::optional<double> snr_db;
  bool complex = false;
  bool ragged = false;
};

struct RecoverFlags {
  std::string method = "gd";
  double mu = 5e-3;
  int iters = 100000;
  std::optional<double> threshold_b;
  std::string interp = "cubic";
  std::string scaling = "local-energy";
  int m = 1;
  std::string input;
  std::string truth;
};

struct ExperimentFlags {
  bool quick = false;
  int jobs = 1;
  std::optional<int> trials;
};

struct Common {
  std::uint64_t seed = 0;
  std::string out = "out";
};

void add_problem_flags(CLI::App* app, ProblemFlags& f) {
  app->add_option("--n", f.n, "Signal length N")->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--window", f.window, "Window kind")
      ->capture_default_str()
      ->check(CLI::IsMember({"rect", "gauss"}));
  app->add_option("--w", f.w, "Window length W (rect; gauss uses sigma = W/3 unless --sigma)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  app->add_option("--sigma", f.sigma, "Gaussian width in samples (support ceil(3 sigma))");
  app->add_option("--l", f.l, "Hop L between frames")->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--snr-db", f.snr_db, "Noise level in dB on the intensities (omit: noiseless)");
  app->add_flag("--complex", f.complex, "Draw a complex signal (default: real)");
  app->add_flag("--ragged-hop", f.ragged, "Allow hops that do not divide N (ceil(N/L) frames)");
}

void add_common_flags(CLI::App* app, Common& c) {
  app->add_option("--seed", c.seed, "Base random seed")->capture_default_str()->envname("STFT_PR_SEED");
  app->add_option("--out", c.out, "Output directory")->capture_default_str();
}

void add_experiment_flags(CLI::App* app, ExperimentFlags& f) {
  app->add_flag("--quick", f.quick, "Divide trial counts by 10");
  app->add_option("--jobs", f.jobs, "Worker threads")->capture_default_str()->check(CLI::PositiveNumber);
  app->add_option("--trials", f.trials, "Override the trial count per grid cell")
      ->check(CLI::PositiveNumber);
}

ProblemConfig make_config(const ProblemFlags& f, std::uint64_t seed) {
  ProblemConfig cfg;
  cfg.N = f.n;
  if (f.window == "rect") {
    cfg.window = WindowSpec::rectangular(f.n, f.w);
  } else {
    cfg.window = WindowSpec::gaussian(f.n, f.sigma.value_or(f.w / 3.0));
  }
  cfg.L = f.l;
  cfg.snr_db = f.snr_db;
  cfg.seed = seed;
  cfg.real_signal = !f.complex;
  cfg.allow_ragged_hop = f.ragged;
  cfg.validate();
  return cfg;
}

bool noisy(const ProblemConfig& cfg) {
  return cfg.snr_db && !(std::isinf(*cfg.snr_db) && *cfg.snr_db > 0);
}

// Truth and measurements drawn exactly as `simulate` draws them.
std::pair<Signal, MeasurementSet> simulate_problem(const ProblemConfig& cfg) {
  Rng rng(derive_seed(cfg.seed, {0}));
  Signal x = random_gaussian_signal(cfg.N, cfg.real_signal, rng);
  MeasurementSet Y = measure(x, cfg);
  if (noisy(cfg)) Y = add_noise(Y, *cfg.snr_db, derive_seed(cfg.seed, {1}));
  return {std::move(x), std::move(Y)};
}

std::string out_path(const std::string& dir, const std::string& name) {
  return (fs::path(dir) / name).string();
}

int cmd_simulate(const ProblemFlags& pf, const Common& c, std::ostream& out) {
  const ProblemConfig cfg = make_config(pf, c.seed);
  const auto [x, Y] = simulate_problem(cfg);
  fs::create_directories(c.out);
  io::write_text_file(out_path(c.out, "signal.json"), io::signal_to_json(x));
  io::write_text_file(out_path(c.out, "measurements.json"), io::measurements_to_json(Y));
  io::write_text_file(out_path(c.out, "config.json"), io::config_to_json(cfg));
  out << "wrote signal.json measurements.json config.json to " << c.out << "\n";
  return kOk;
}

int cmd_recover(const ProblemFlags& pf, const RecoverFlags& rf, const Common& c,
                std::ostream& out) {
  const ProblemConfig cfg = make_config(pf, c.seed);
  const Method method = method_from_string(rf.method);
  const InterpolationKind interp = interpolation_from_string(rf.interp);

  std::optional<Signal> truth;
  MeasurementSet Y;
  if (rf.input.empty()) {
    auto [x, y] = simulate_problem(cfg);
    truth = std::move(x);
    Y = std::move(y);
  } else {
    Y = io::measurements_from_json(io::read_text_file(rf.input));
    if (Y.N() != cfg.N || Y.frames() != cfg.frames()) {
      throw DimensionError("measurement file does not match --n / --l");
    }
    if (!rf.truth.empty()) truth = io::signal_from_json(io::read_text_file(rf.truth));
  }
  const Signal* truth_ptr = truth ? &*truth : nullptr;

  nlohmann::json summary = {{"method", to_string(method)}};
  Signal estimate;
  std::optional<TrialRecord> trace;

  auto initial = [&]() {
    InitResult init = ls_init(Y, cfg, interp);
    if (init.degenerate) {
      throw Error("least-squares initialization vanished (no positive energy on diag 0)");
    }
    if (truth) summary["init_error"] = relative_error(init.estimate, *truth);
    return init.estimate;
  };

  switch (method) {
    case Method::kLsInit:
      estimate = initial();
      break;
    case Method::kRecursive:
      estimate = recursive_recovery(Y, cfg);
      break;
    case Method::kUnitModulus: {
      const UnitModulusResult r = unit_modulus_init(Y, cfg, rf.m);
      estimate = r.estimate;
      summary["eigenvalue"] = r.eigenvalue;
      summary["second_eigenvalue"] = r.second_eigenvalue;
      break;
    }
    case Method::kGd: {
      GdOptions o;
      o.mu = rf.mu;
      o.max_iter = rf.iters;
      o.B = rf.threshold_b;
      o.scaling = step_scaling_from_string(rf.scaling);
      const RecoveryResult r = gd_recover(Y, cfg, initial(), o, truth_ptr);
      estimate = r.estimate;
      trace = r.record;
      summary["iterations"] = r.record.iterations;
      summary["stop"] = to_string(r.stop);
      summary["final_loss"] = r.final_loss;
      summary["step"] = r.step;
      break;
    }
    case Method::kGla: {
      GlaOptions o;
      o.max_iter = rf.iters;
      const RecoveryResult r = gla_recover(Y, cfg, initial(), o, truth_ptr);
      estimate = r.estimate;
      trace = r.record;
      summary["iterations"] = r.record.iterations;
      summary["stop"] = to_string(r.stop);
      summary["final_residual"] = r.final_loss;
      break;
    }
  }
  if (truth) summary["relative_error"] = relative_error(estimate, *truth);

  fs::create_directories(c.out);
  std::vector<std::string> written = {"estimate.json", "summary.json", "config.json"};
  io::write_text_file(out_path(c.out, "estimate.json"), io::signal_to_json(estimate));
  io::write_text_file(out_path(c.out, "summary.json"), summary.dump(2) + "\n");
  io::write_text_file(out_path(c.out, "config.json"), io::config_to_json(cfg));
  if (trace) {
    std::ostringstream os;
    write_trace_csv(os, *trace);
    io::write_text_file(out_path(c.out, "trace.csv"), os.str());
    written.push_back("trace.csv");
  }
  out << "method " << to_string(method);
  if (summary.contains("relative_error")) {
    out << "  relative error " << io::format_double(summary["relative_error"].get<double>());
  }
  out << "\n";
  for (const auto& name : written) out << "  " << out_path(c.out, name) << "\n";
  return kOk;
}

int cmd_experiment(ExperimentKind kind, const ExperimentFlags& ef, const Common& c,
                   std::ostream& out) {
  ExperimentSpec spec = ExperimentSpec::defaults(kind, ef.quick);
  spec.seed = c.seed;
  spec.jobs = ef.jobs;
  if (ef.trials) spec.trials = *ef.trials;
  CertificateReport report;
  const auto files = run_experiment(spec, c.out, &report);
  for (const auto& f : files) out << out_path(c.out, f) << "\n";
  if (kind != ExperimentKind::kTheoryCertificates) return kOk;
  for (const auto& r : report.results) {
    out << (r.passed() ? "PASS " : "FAIL ") << r.name << "  samples=" << r.samples
        << " violations=" << r.violations << " worst_margin=" << io::format_double(r.worst_margin);
    if (!r.counterexample.empty()) out << "  first: " << r.counterexample;
    out << "\n";
  }
  return report.all_passed() ? kOk : kRuntimeError;
}

}  // namespace

int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"Phase retrieval from STFT magnitudes: simulation, recovery and experiments",
               "stftpr"};
  app.require_subcommand(1);
  app.set_version_flag("--version", std::string(artifact_version()));

  ProblemFlags pf;
  RecoverFlags rf;
  ExperimentFlags ef;
  Common common;

  CLI::App* simulate = app.add_subcommand("simulate", "Draw a signal and write its measurements");
  add_problem_flags(simulate, pf);
  add_common_flags(simulate, common);

  CLI::App* recover = app.add_subcommand("recover", "Recover a signal from STFT magnitudes");
  add_problem_flags(recover, pf);
  recover->add_option("--method", rf.method, "Recovery method")
      ->capture_default_str()
      ->check(CLI::IsMember({"gd", "gla", "ls", "recursive", "unit-modulus"}));
  recover->add_option("--mu", rf.mu, "Gradient step size")->capture_default_str()->check(CLI::PositiveNumber);
  recover->add_option("--iters", rf.iters, "Iteration cap (gd, gla)")
      ->capture_default_str()
      ->check(CLI::PositiveNumber);
  recover->add_option("--threshold-b", rf.threshold_b, "Per-entry modulus bound for gd")
      ->check(CLI::PositiveNumber);
  recover->add_option("--interp", rf.interp, "Interpolation for hops L > 1")
      ->capture_default_str()
      ->check(CLI::IsMember({"linear", "cubic"}));
  recover->add_option("--step-scaling", rf.scaling, "How --mu becomes the gd step")
      ->capture_default_str()
      ->check(CLI::IsMember({"absolute", "init-energy", "local-energy"}));
  recover->add_option("--m", rf.m, "Diagonal index for unit-modulus recovery")->capture_default_str();
  recover->add_option("--input", rf.input, "Measurement JSON (default: simulate from --seed)")
      ->check(CLI::ExistingFile);
  recover->add_option("--truth", rf.truth, "Signal JSON used to report the error with --input")
      ->check(CLI::ExistingFile);
  add_common_flags(recover, common);

  const std::map<std::string, std::pair<ExperimentKind, std::string>> experiments = {
      {"exp-init-error", {ExperimentKind::kInitErrorSweep, "Initialization error over W, L and interpolation"}},
      {"exp-basin", {ExperimentKind::kBasin, "Gradient descent from perturbed ground truth"}},
      {"exp-snr", {ExperimentKind::kSnrSweep, "Gradient descent and Griffin-Lim over noise levels"}},
      {"exp-example", {ExperimentKind::kSingleExample, "Single recovery traces and overlays"}},
      {"exp-surface", {ExperimentKind::kLossSurface, "Loss surface of a length-5 example"}},
      {"exp-window", {ExperimentKind::kWindowSpectrum, "Window spectra and 3 dB bandwidths"}},
      {"exp-certify", {ExperimentKind::kTheoryCertificates, "Sampled checks of the convergence bounds"}},
  };
  std::map<CLI::App*, ExperimentKind> experiment_apps;
  for (const auto& [name, entry] : experiments) {
    CLI::App* sub = app.add_subcommand(name, entry.second);
    add_experiment_flags(sub, ef);
    add_common_flags(sub, common);
    experiment_apps[sub] = entry.first;
  }

  std::vector<std::string> args(argv.rbegin(), argv.rend());
  if (!args.empty()) args.pop_back();  // program name
  try {
    app.parse(args);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e, out, err);
    return code == 0 ? kOk : kValidationError;
  }

  try {
    if (simulate->parsed()) return cmd_simulate(pf, common, out);
    if (recover->parsed()) return cmd_recover(pf, rf, common, out);
    for (const auto& [sub, kind] : experiment_apps) {
      if (sub->parsed()) return cmd_experiment(kind, ef, common, out);
    }
  } catch (const InvalidInputError& e) {
    err << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const DimensionError& e) {
    err << "error: " << e.what() << "\n";
    return kValidationError;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return kRuntimeError;
  }
  return kValidationError;
}

int run(int argc, char** argv) {
  return run(std::vector<std::string>(argv, argv + argc), std::cout, std::cerr);
}

}  // namespace stftpr::cli
