// Copyright 2026 The shuffle-dp Authors
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

#ifndef SHUFFLE_DP_TOOLS_CLI_H_
#define SHUFFLE_DP_TOOLS_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace shuffle_dp {

// Exit statuses of shuffle_acct.
inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitValidation = 2;
inline constexpr int kExitRange = 3;

// Runs shuffle_acct on `args` (without the program name). Records go to `out`
// unless --output names a file; diagnostics go to `err`.
int RunCli(const std::vector<std::string>& args, std::ostream& out,
           std::ostream& err);

}  // namespace shuffle_dp

#endif  // SHUFFLE_DP_TOOLS_CLI_H_
