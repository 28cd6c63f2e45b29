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

#ifndef CISIMKIT_ERROR_H_
#define CISIMKIT_ERROR_H_

#include <stdexcept>
#include <string>

namespace cisimkit {

// Raised for anything the caller can fix: bad arguments, malformed files,
// violated preconditions. Command-line tools map it to exit code 2; any
// other exception is treated as an internal failure.
class Error : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

// Throws Error(message) when `condition` is false.
inline void Require(bool condition, const std::string& message) {
  if (!condition) throw Error(message);
}

}  // namespace cisimkit

#endif  // CISIMKIT_ERROR_H_
