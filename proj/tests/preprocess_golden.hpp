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

// Hand-written expected encodings for fixtures/preprocess.jsonl under
// min_count=10, max_len=40, max_recs=5.
//
// Raw counts (items + rec entries, before truncation): hot 38, p10 10,
// p9 9, old 5, r1/r2/r3/r5/r7 1 each. So hot and p10 survive and everything
// else collapses onto the rare index.

#pragma once

#include <fstream>
#include <string>
#include <vector>

#include "actrec/datapipe.hpp"

#ifndef ACTREC_FIXTURE_DIR
#error "ACTREC_FIXTURE_DIR must be defined"
#endif

namespace actrec::testing {

inline std::string fixture_path(const std::string& name) {
  return std::string(ACTREC_FIXTURE_DIR) + "/" + name;
}

struct PreprocessGolden {
  std::vector<std::string> vocab_ids{"<RARE>", "hot", "p10"};
  std::size_t rejected = 1;  // u_empty
  std::size_t parsed = 5;
  std::vector<EncodedSequence> encoded;

  PreprocessGolden() {
    // u_long: events 5..44 survive; p10 sat at raw positions 10,15,20,25,30.
    std::vector<ItemIndex> long_items(40, 1);
    for (std::size_t raw : {10u, 15u, 20u, 25u, 30u}) long_items[raw - 5] = 2;
    encoded.emplace_back(long_items, std::vector<std::vector<ItemIndex>>(40));
    // u_recs: 7 recs capped to r1 r2 r3 p10 r5; p9 is rare.
    encoded.emplace_back(std::vector<ItemIndex>{1, 2, 0, 1},
                         std::vector<std::vector<ItemIndex>>{
                             {0, 0, 0, 2, 0}, {0}, {}, {}});
    encoded.emplace_back(std::vector<ItemIndex>{2, 2, 2},
                         std::vector<std::vector<ItemIndex>>(3));
    encoded.emplace_back(std::vector<ItemIndex>(6, 0),
                         std::vector<std::vector<ItemIndex>>(6));
    // u_single has one event and is dropped.
  }
};

inline ParseResult parse_fixture(const std::string& name) {
  std::ifstream in(fixture_path(name));
  return parse_log(in);
}

}  // namespace actrec::testing
