// Copyright 2026 The actrec Authors.
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

#pragma once

#include <cstdint>
#include <vector>

#include "actrec/datapipe.hpp"
#include "actrec/grad.hpp"
#include "actrec/model.hpp"

namespace actrec {

/// A small random problem for finite-difference checks: V_x = 50, d = k = 8,
/// T = 6, slates at three steps of which at least one is clicked.
struct GradcheckCase {
  ModelParams<double> params;
  EncodedSequence sequence;
};

GradcheckCase make_gradcheck_case(std::uint64_t seed);

struct GradcheckOptions {
  std::vector<MaskMode> masks{MaskMode::kAll, MaskMode::kClicksOnly};
  double epsilon = 1e-5;
  bool corrupt = false;  // negative control: perturb one analytic entry
};

/// Worst relative error over the requested masks.
FdReport run_gradcheck(Variant variant, std::uint64_t seed,
                       const GradcheckOptions& opts = {});

}  // namespace actrec
