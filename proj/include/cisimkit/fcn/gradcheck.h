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

#ifndef CISIMKIT_FCN_GRADCHECK_H_
#define CISIMKIT_FCN_GRADCHECK_H_

#include "cisimkit/fcn/train.h"

namespace cisimkit::fcn {

struct GradCheckResult {
  double max_rel_error = 0.0;
  std::size_t worst_param = 0;
  std::size_t checked = 0;
  // Coordinates whose +/-h probes change the STOI clip pattern or a leaky
  // rectifier sign; the objective is not differentiable across those.
  std::size_t excluded = 0;
};

// Compares ComputeGradient with central differences of the objective for
// every parameter. Relative error is |a - n| / max(|a|, |n|, abs_floor).
GradCheckResult CheckGradient(const FcnModel& model, const Utterance& utt, double alpha, double h = 1e-4,
                              double abs_floor = 1e-8);

}  // namespace cisimkit::fcn

#endif  // CISIMKIT_FCN_GRADCHECK_H_
