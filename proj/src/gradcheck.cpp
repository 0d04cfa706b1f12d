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

#include "actrec/gradcheck.hpp"

namespace actrec {

GradcheckCase make_gradcheck_case(std::uint64_t seed) {
  constexpr ItemIndex kVocab = 50;
  constexpr Index kDim = 8;
  constexpr std::size_t kLen = 6;
  Rng rng = Rng(seed).derive(0x9c);

  auto params = ModelParams<double>::glorot(rng, kVocab, kDim, kDim);
  for (auto* b : {&params.b_z, &params.b_r, &params.b_h, &params.b_out})
    for (Index i = 0; i < b->size(); ++i) (*b)(i) = rng.uniform(-0.2, 0.2);

  std::vector<ItemIndex> items(kLen);
  for (auto& it : items) it = static_cast<ItemIndex>(rng.below(kVocab));
  std::vector<std::vector<ItemIndex>> recs(kLen);
  for (std::size_t t : {0u, 2u, 3u}) {
    const std::size_t n = 1 + rng.below(5);
    for (std::size_t i = 0; i < n; ++i)
      recs[t].push_back(static_cast<ItemIndex>(rng.below(kVocab)));
  }
  // Step 2 is always a click; the others click with probability 1/2.
  for (std::size_t t : {0u, 2u, 3u})
    if (t == 2 || rng.bernoulli(0.5)) items[t + 1] = recs[t][rng.below(recs[t].size())];
  return {std::move(params), EncodedSequence(std::move(items), std::move(recs))};
}

FdReport run_gradcheck(Variant variant, std::uint64_t seed,
                       const GradcheckOptions& opts) {
  const GradcheckCase c = make_gradcheck_case(seed);
  FdReport worst;
  for (MaskMode mode : opts.masks) {
    const auto mask = loss_mask(c.sequence, mode);
    Gradients<double> g;
    backward(c.params, c.sequence, variant, mask, g);
    if (opts.corrupt) g.W_out(c.sequence.items()[1], 0) += 0.05;
    FdReport r = fd_compare(c.params, g, c.sequence, variant, mask, opts.epsilon);
    worst.checked += r.checked;
    if (worst.worst_entry < 0 || r.max_rel_error > worst.max_rel_error) {
      worst.max_rel_error = r.max_rel_error;
      worst.worst_tensor = r.worst_tensor;
      worst.worst_entry = r.worst_entry;
    }
  }
  return worst;
}

}  // namespace actrec
