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

#ifndef STFTPR_CLI_HPP_
#define STFTPR_CLI_HPP_

#include <ostream>
#include <string>
#include <vector>

namespace stftpr::cli {

enum ExitCode : int {
  kOk = 0,
  kValidationError = 1,
  kRuntimeError = 2,
};

/// Parses argv (argv[0] is the program name) and runs one subcommand.
/// Normal output goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& argv, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace stftpr::cli

#endif  // STFTPR_CLI_HPP_
