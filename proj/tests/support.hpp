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

// Shared fixtures for the unit tests: random small models and sequences.

#pragma once

#include <vector>

#include "actrec/datapipe.hpp"
#include "actrec/model.hpp"
#include "actrec/rng.hpp"

namespace actrec::testing {

/// Glorot weights plus small random biases, so no gradient is trivially zero.
inline ModelParams<double> random_params(Rng& rng, Index vocab, Index d,
                                         Index k, double scale = 1.0) {
  auto p = ModelParams<double>::glorot(rng, vocab, d, k);
  for (auto* b : {&p.b_z, &p.b_r, &p.b_h})
    for (Index i = 0; i < b->size(); ++i) (*b)(i) = rng.uniform(-0.2, 0.2);
  for (Index i = 0; i < p.b_out.size(); ++i) p.b_out(i) = rng.uniform(-0.2, 0.2);
  if (scale != 1.0) p *= scale;
  return p;
}

/// Random sequence of length T. Steps listed in `rec_steps` carry a slate of
/// 1..5 items; when `click` is set the next item is taken from the slate.
inline EncodedSequence random_sequence(Rng& rng, ItemIndex vocab, std::size_t T,
                                       const std::vector<std::size_t>& rec_steps,
                                       bool click = false) {
  std::vector<ItemIndex> items(T);
  std::vector<std::vector<ItemIndex>> recs(T);
  for (auto& it : items) it = static_cast<ItemIndex>(rng.below(vocab));
  for (std::size_t t : rec_steps) {
    const std::size_t k = 1 + rng.below(5);
    for (std::size_t i = 0; i < k; ++i)
      recs[t].push_back(static_cast<ItemIndex>(rng.below(vocab)));
    if (click && t + 1 < T) items[t + 1] = recs[t][rng.below(recs[t].size())];
  }
  return EncodedSequence(std::move(items), std::move(recs));
}

inline std::vector<bool> all_steps(const EncodedSequence& s) {
  return loss_mask(s, MaskMode::kAll);
}

}  // namespace actrec::testing
