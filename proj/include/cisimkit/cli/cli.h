// Copyright 2026 The cisimkit Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//     http://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#ifndef CISIMKIT_CLI_CLI_H_
#define CISIMKIT_CLI_CLI_H_

#include <iosfwd>
#include <string>
#include <vector>

namespace cisimkit::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitInternal = 1;
inline constexpr int kExitUser = 2;

// Runs one `cisimkit` invocation. `args` excludes the program name. Normal
// output goes to `out`, diagnostics to `err`; returns the process exit code.
int Run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cisimkit::cli

#endif  // CISIMKIT_CLI_CLI_H_
