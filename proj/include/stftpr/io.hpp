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
// JSON documents for signals, measurements and configurations.
//
// Signal:
//   {"length": N, "real": bool, "values": [[re, im], ...]}
// Measurements:
//   {"frames": F, "N": N, "Z": [[...row 0...], ...]}
// Y is not stored; it is recomputed from Z on load.

#ifndef STFTPR_IO_HPP_
#define STFTPR_IO_HPP_

#include <string>

#include "stftpr/model.hpp"

namespace stftpr::io {

std::string signal_to_json(const Signal& x);
Signal signal_from_json(const std::string& text);

std::string measurements_to_json(const MeasurementSet& Y);
MeasurementSet measurements_from_json(const std::string& text);

std::string config_to_json(const ProblemConfig& cfg);

// "%.17g", or "inf" / "-inf" / "nan".
std::string format_double(double v);

void write_text_file(const std::string& path, const std::string& text);
std::string read_text_file(const std::string& path);

}  // namespace stftpr::io

#endif  // STFTPR_IO_HPP_
