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
#include <functional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "actrec/datapipe.hpp"
#include "actrec/model.hpp"

namespace actrec {

struct TrainConfig {
  Variant variant = Variant::kLate;
  Index d = 40;
  Index k = 40;
  std::size_t batch_size = 64;
  std::size_t iterations = 10000;
  double lr_start = 0.01;
  double lr_end = 0.001;
  std::uint64_t seed = 1;
  MaskMode mask_mode = MaskMode::kAll;
  std::size_t eval_every = 0;  // 0 disables periodic hooks
  std::size_t threads = 1;

  /// clicks_only whenever the variant is the clicks baseline.
  MaskMode effective_mask() const {
    return variant == Variant::kClicks ? MaskMode::kClicksOnly : mask_mode;
  }
  void validate() const;
};

struct NllResult {
  double sum = 0.0;
  std::size_t count = 0;
  double mean() const { return count ? sum / static_cast<double>(count) : 0.0; }
};

/// Masked negative log-likelihood of `targets` under column-wise softmax of
/// `logits` (one column per step).
NllResult nll_loss(const Matrix<double>& logits,
                   std::span<const ItemIndex> targets,
                   const std::vector<bool>& mask);

/// lr_start / sqrt(1 + c * step), with c fixed so lr(iterations) = lr_end.
double lr_schedule(const TrainConfig& config, std::size_t step);

struct HistoryEntry {
  std::size_t iteration = 0;
  double loss = 0.0;  // mean per unmasked step in the batch
  double lr = 0.0;
  double seconds = 0.0;
};

struct TrainHistory {
  std::vector<HistoryEntry> entries;

  /// `iteration,loss,lr,seconds`.
  void write_csv(std::ostream& out) const;
};

struct TrainResult {
  ModelParams<double> params;
  TrainHistory history;
  bool diverged = false;
  std::string message;
};

/// Called after iteration `it` (1-based count of completed steps) every
/// eval_every iterations.
using TrainHook =
    std::function<void(std::size_t it, const ModelParams<double>& params)>;

/// Minibatch Adam on the masked NLL. One iteration consumes one batch. On a
/// non-finite loss or gradient the run stops and returns the last good
/// parameters with diverged = true.
TrainResult train(const TrainConfig& config,
                  std::span<const EncodedSequence> train_data,
                  Index vocab_size, const TrainHook& hook = {});

/// Sum of per-sequence gradients for one batch, accumulated in batch order
/// regardless of the thread count. Returns the summed loss.
double batch_gradient(const ModelParams<double>& params, const Batch& batch,
                      Variant variant, std::size_t threads,
                      Gradients<double>& total);

}  // namespace actrec
