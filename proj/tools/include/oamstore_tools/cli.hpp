// Copyright 2026 The oamstore Authors
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.


#ifndef OAMSTORE_TOOLS_CLI_HPP
#define OAMSTORE_TOOLS_CLI_HPP

#include <iosfwd>
#include <string>
#include <vector>

namespace oamstore::tools {

enum ExitCode : int {
  kSuccess = 0,
  kUserError = 1,
  kEstimatorFailure = 2,
  kInternalError = 3,
};

/// Runs the command line `args` (without the program name). Reports go to
/// `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace oamstore::tools

#endif
