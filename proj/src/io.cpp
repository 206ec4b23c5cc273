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

#include "stftpr/io.hpp"

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "json.hpp"

namespace stftpr::io {

using nlohmann::json;

std::string format_double(double v) {
  if (std::isnan(v)) return "nan";
  if (std::isinf(v)) return v > 0 ? "inf" : "-inf";
  char buf[64];
  std::snprintf(buf, sizeof(buf), "%.17g", v);
  return buf;
}

namespace {

json parse(const std::string& text) {
  try {
    return json::parse(text);
  } catch (const json::parse_error& e) {
    throw InvalidInputError(std::string("malformed JSON: ") + e.what());
  }
}

}  // namespace

std::string signal_to_json(const Signal& x) {
  json values = json::array();
  for (int n = 0; n < x.length(); ++n) values.push_back({x[n].real(), x[n].imag()});
  json doc = {{"length", x.length()}, {"real", x.is_real()}, {"values", values}};
  return doc.dump(2) + "\n";
}

Signal signal_from_json(const std::string& text) {
  const json doc = parse(text);
  try {
    const auto& values = doc.at("values");
    const bool real = doc.value("real", false);
    Eigen::VectorXcd v(values.size());
    for (std::size_t i = 0; i < values.size(); ++i) {
      const auto& entry = values[i];
      if (entry.is_number()) {
        v[i] = Complex(entry.get<double>(), 0.0);
      } else {
        if (entry.size() != 2) throw InvalidInputError("signal entries must be [re, im]");
        v[i] = Complex(entry[0].get<double>(), entry[1].get<double>());
      }
    }
    if (doc.contains("length") && doc["length"].get<long>() != v.size()) {
      throw DimensionError("signal JSON: length field does not match values");
    }
    if (real) return Signal::from_real(v.real());
    return Signal::from_complex(std::move(v));
  } catch (const json::exception& e) {
    throw InvalidInputError(std::string("signal JSON: ") + e.what());
  }
}

std::string measurements_to_json(const MeasurementSet& Y) {
  json rows = json::array();
  for (int m = 0; m < Y.frames(); ++m) {
    json row = json::array();
    for (int k = 0; k < Y.N(); ++k) row.push_back(Y.Z(m, k));
    rows.push_back(row);
  }
  json doc = {{"frames", Y.frames()}, {"N", Y.N()}, {"Z", rows}};
  return doc.dump() + "\n";
}

MeasurementSet measurements_from_json(const std::string& text) {
  const json doc = parse(text);
  try {
    const auto& rows = doc.at("Z");
    if (rows.empty()) throw DimensionError("measurement JSON: no frames");
    const std::size_t N = rows[0].size();
    Eigen::MatrixXd Z(rows.size(), N);
    for (std::size_t m = 0; m < rows.size(); ++m) {
      if (rows[m].size() != N) throw DimensionError("measurement JSON: ragged rows");
      for (std::size_t k = 0; k < N; ++k) Z(m, k) = rows[m][k].get<double>();
    }
    return measurements_from_intensities(std::move(Z));
  } catch (const json::exception& e) {
    throw InvalidInputError(std::string("measurement JSON: ") + e.what());
  }
}

std::string config_to_json(const ProblemConfig& cfg) {
  json doc = {
      {"N", cfg.N},
      {"window", to_string(cfg.window.kind)},
      {"W", cfg.W()},
      {"L", cfg.L},
      {"frames", cfg.frames()},
      {"seed", cfg.seed},
      {"real_signal", cfg.real_signal},
  };
  if (cfg.window.kind == WindowKind::kGaussian) doc["sigma"] = cfg.window.sigma;
  if (cfg.snr_db && std::isfinite(*cfg.snr_db)) {
    doc["snr_db"] = *cfg.snr_db;
  } else {
    doc["snr_db"] = "inf";
  }
  return doc.dump(2) + "\n";
}

void write_text_file(const std::string& path, const std::string& text) {
  std::ofstream out(path, std::ios::binary);
  if (!out) throw Error("cannot open '" + path + "' for writing");
  out << text;
  if (!out) throw Error("write to '" + path + "' failed");
}

std::string read_text_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw InvalidInputError("cannot open '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

}  // namespace stftpr::io
