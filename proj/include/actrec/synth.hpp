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

#include <cstddef>
#include <cstdint>
#include <ostream>
#include <vector>

#include "actrec/datapipe.hpp"

namespace actrec {

/// Synthetic logs with a known blackbox recommender. Items are split into
/// clusters (item i belongs to cluster i mod n_clusters and has popularity
/// rank i / n_clusters inside it). Organic moves stay in the cluster with
/// probability p_intra and are Zipf-distributed by rank. With probability
/// rec_rate a step shows the slate_size most popular items of the next
/// cluster over; the user then picks uniformly from the slate with
/// probability p_follow.
struct SynthConfig {
  std::size_t V = 1000;
  std::size_t n_sessions = 20000;
  std::size_t len_min = 5;
  std::size_t len_max = 20;
  double zipf_s = 1.1;
  std::size_t n_clusters = 20;
  double p_intra = 0.8;
  double rec_rate = 0.05;
  std::size_t slate_size = 5;
  double p_follow = 0.8;
  std::uint64_t seed = 0;

  /// Throws ContractViolation naming the offending field.
  void validate() const;
};

struct SynthTruth {
  /// Per session: steps whose successor was drawn from the slate.
  std::vector<std::vector<std::size_t>> driven_steps;

  /// One JSON list of step indices per line.
  void write(std::ostream& out) const;
};

struct SynthLog {
  std::vector<RawSession> sessions;
  SynthTruth truth;
};

SynthLog generate(const SynthConfig& config);

/// Raw id used for catalog item i.
std::string synth_item_id(std::size_t i);

}  // namespace actrec
