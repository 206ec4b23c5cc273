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

#include <pybind11/complex.h>
#include <pybind11/eigen.h>
#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <map>
#include <optional>
#include <string>

#include "stftpr/experiments.hpp"
#include "stftpr/forward.hpp"
#include "stftpr/init.hpp"
#include "stftpr/solver.hpp"

namespace py = pybind11;
using namespace stftpr;

namespace {

Signal as_signal(const Eigen::VectorXcd& x, const ProblemConfig& cfg) {
  if (cfg.real_signal) return Signal::from_real(x.real());
  return Signal::from_complex(x);
}

ProblemConfig make_config(int N, const std::string& window, int W, std::optional<double> sigma,
                          int L, bool real, bool ragged) {
  ProblemConfig cfg;
  cfg.N = N;
  if (window == "rect") {
    cfg.window = WindowSpec::rectangular(N, W);
  } else if (window == "gauss") {
    cfg.window = WindowSpec::gaussian(N, sigma.value_or(W / 3.0));
  } else {
    throw InvalidInputError("window must be 'rect' or 'gauss'");
  }
  cfg.L = L;
  cfg.real_signal = real;
  cfg.allow_ragged_hop = ragged;
  cfg.validate();
  return cfg;
}

py::dict result_dict(const RecoveryResult& r) {
  py::dict d;
  d["estimate"] = r.estimate.values();
  d["iterations"] = r.record.iterations;
  d["error"] = r.record.error;
  d["loss_trace"] = r.record.loss_trace;
  d["error_trace"] = r.record.error_trace;
  d["stop"] = to_string(r.stop);
  d["final_loss"] = r.final_loss;
  return d;
}

}  // namespace

PYBIND11_MODULE(_core, m) {
  m.doc() = "Phase retrieval from STFT magnitudes.";
  m.attr("__version__") = artifact_version();

  // Translators are tried newest first, so the base class goes first.
  py::register_exception<Error>(m, "Error", PyExc_RuntimeError);
  py::register_exception<InvalidInputError>(m, "InvalidInputError", PyExc_ValueError);
  py::register_exception<DimensionError>(m, "DimensionError", PyExc_ValueError);

  py::class_<ProblemConfig>(m, "ProblemConfig")
      .def_readonly("N", &ProblemConfig::N)
      .def_readonly("L", &ProblemConfig::L)
      .def_readonly("real_signal", &ProblemConfig::real_signal)
      .def_property_readonly("W", &ProblemConfig::W)
      .def_property_readonly("frames", &ProblemConfig::frames)
      .def_property_readonly("window", [](const ProblemConfig& c) { return c.window.values; });

  m.def("make_config", &make_config, py::arg("N"), py::arg("window") = "rect", py::arg("W") = 7,
        py::arg("sigma") = py::none(), py::arg("L") = 1, py::arg("real") = true,
        py::arg("ragged") = false);

  m.def(
      "measure",
      [](const Eigen::VectorXcd& x, const ProblemConfig& cfg) {
        const MeasurementSet Y = measure(as_signal(x, cfg), cfg);
        return py::make_tuple(Y.Z, Y.Y);
      },
      py::arg("x"), py::arg("cfg"), "Intensities Z and their row-wise (1/N) DFT Y.");

  m.def(
      "add_noise",
      [](const Eigen::MatrixXd& Z, double snr_db, std::uint64_t seed) {
        return add_noise(measurements_from_intensities(Z), snr_db, seed).Z;
      },
      py::arg("Z"), py::arg("snr_db"), py::arg("seed"));

  m.def(
      "ls_init",
      [](const Eigen::MatrixXd& Z, const ProblemConfig& cfg, const std::string& interp) {
        return ls_init(measurements_from_intensities(Z), cfg, interpolation_from_string(interp))
            .estimate.values();
      },
      py::arg("Z"), py::arg("cfg"), py::arg("interp") = "cubic");

  m.def(
      "recursive_recovery",
      [](const Eigen::MatrixXd& Z, const ProblemConfig& cfg) {
        return recursive_recovery(measurements_from_intensities(Z), cfg).values();
      },
      py::arg("Z"), py::arg("cfg"));

  m.def(
      "unit_modulus_init",
      [](const Eigen::MatrixXd& Z, const ProblemConfig& cfg, int M) {
        const UnitModulusResult r = unit_modulus_init(measurements_from_intensities(Z), cfg, M);
        return py::make_tuple(r.estimate.values(), r.eigenvalue);
      },
      py::arg("Z"), py::arg("cfg"), py::arg("M") = 1);

  m.def(
      "loss",
      [](const Eigen::VectorXcd& z, const Eigen::MatrixXd& Z, const ProblemConfig& cfg) {
        return loss(Signal::from_complex(z), measurements_from_intensities(Z), cfg);
      },
      py::arg("z"), py::arg("Z"), py::arg("cfg"));

  m.def(
      "gradient",
      [](const Eigen::VectorXcd& z, const Eigen::MatrixXd& Z, const ProblemConfig& cfg) {
        return gradient(Signal::from_complex(z), measurements_from_intensities(Z), cfg);
      },
      py::arg("z"), py::arg("Z"), py::arg("cfg"));

  m.def(
      "gd_recover",
      [](const Eigen::MatrixXd& Z, const ProblemConfig& cfg, const Eigen::VectorXcd& x0,
         double mu, int max_iter, std::optional<double> B, const std::string& scaling,
         std::optional<Eigen::VectorXcd> truth) {
        GdOptions o;
        o.mu = mu;
        o.max_iter = max_iter;
        o.B = B;
        o.scaling = step_scaling_from_string(scaling);
        std::optional<Signal> t;
        if (truth) t = as_signal(*truth, cfg);
        return result_dict(gd_recover(measurements_from_intensities(Z), cfg, as_signal(x0, cfg), o,
                                      t ? &*t : nullptr));
      },
      py::arg("Z"), py::arg("cfg"), py::arg("x0"), py::arg("mu") = 5e-3,
      py::arg("max_iter") = 100000, py::arg("B") = py::none(), py::arg("scaling") = "local-energy",
      py::arg("truth") = py::none());

  m.def(
      "gla_recover",
      [](const Eigen::MatrixXd& Z, const ProblemConfig& cfg, const Eigen::VectorXcd& x0,
         int max_iter, std::optional<Eigen::VectorXcd> truth) {
        GlaOptions o;
        o.max_iter = max_iter;
        std::optional<Signal> t;
        if (truth) t = as_signal(*truth, cfg);
        return result_dict(gla_recover(measurements_from_intensities(Z), cfg, as_signal(x0, cfg),
                                       o, t ? &*t : nullptr));
      },
      py::arg("Z"), py::arg("cfg"), py::arg("x0"), py::arg("max_iter") = 5000,
      py::arg("truth") = py::none());

  m.def(
      "relative_error",
      [](const Eigen::VectorXcd& estimate, const Eigen::VectorXcd& truth) {
        return relative_error(Signal::from_complex(estimate), Signal::from_complex(truth));
      },
      py::arg("estimate"), py::arg("truth"));

  m.def(
      "run_experiment",
      [](const std::string& kind, const std::string& out_dir, bool quick, std::uint64_t seed,
         int jobs) {
        static const std::map<std::string, ExperimentKind> kinds = {
            {"init-error", ExperimentKind::kInitErrorSweep},
            {"basin", ExperimentKind::kBasin},
            {"snr", ExperimentKind::kSnrSweep},
            {"example", ExperimentKind::kSingleExample},
            {"surface", ExperimentKind::kLossSurface},
            {"window", ExperimentKind::kWindowSpectrum},
            {"certify", ExperimentKind::kTheoryCertificates},
        };
        const auto it = kinds.find(kind);
        if (it == kinds.end()) throw InvalidInputError("unknown experiment '" + kind + "'");
        ExperimentSpec spec = ExperimentSpec::defaults(it->second, quick);
        spec.seed = seed;
        spec.jobs = jobs;
        py::gil_scoped_release release;
        return run_experiment(spec, out_dir);
      },
      py::arg("kind"), py::arg("out_dir"), py::arg("quick") = true, py::arg("seed") = 0,
      py::arg("jobs") = 1);
}
