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

#include <istream>
#include <ostream>

#include "actrec/model.hpp"

namespace actrec {

// Layout (all integers and floats little-endian):
//   8 bytes  magic "ACRECKPT"
//   u32      format version (1)
//   u32      variant (0 navigation, 1 early, 2 late, 3 clicks)
//   u64      V_x, u64 d, u64 k
//   f64[]    tensors in visit_tensors order, each matrix row-major
//            (vectors as a single row of entries)

inline constexpr std::uint32_t kCheckpointVersion = 1;

struct Checkpoint {
  Variant variant = Variant::kLate;
  ModelParams<double> params;
};

void save_checkpoint(std::ostream& out, const ModelParams<double>& params,
                     Variant variant);
/// Throws DataError on bad magic, version, or truncated payload.
Checkpoint load_checkpoint(std::istream& in);

}  // namespace actrec
