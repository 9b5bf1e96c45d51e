// Copyright 2026 The mcat-slu Authors.
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

#ifndef SLU_HARNESS_GRADCHECK_SUITE_H_
#define SLU_HARNESS_GRADCHECK_SUITE_H_

#include <cstdint>
#include <string>
#include <vector>

#include "slu/nn/gradcheck.h"

namespace slu::harness {

struct GradCheckCase {
  std::string name;
  nn::GradCheckReport report;
};

// Double-precision checks of every layer, the NLU loss in each integration
// mode, and the score encoder loss, on small random shapes.
std::vector<GradCheckCase> RunGradCheckSuite(uint64_t seed = 1, const nn::GradCheckOptions& options = {});

}  // namespace slu::harness

#endif  // SLU_HARNESS_GRADCHECK_SUITE_H_
