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
#include <optional>
#include <ostream>
#include <span>
#include <string>
#include <vector>

#include "actrec/datapipe.hpp"
#include "actrec/model.hpp"

namespace actrec {

enum class EventKind { kView, kClick };

struct EventRecord {
  std::size_t sequence = 0;
  std::size_t step = 0;
  ItemIndex target = 0;
  bool hit = false;
  EventKind kind = EventKind::kView;
};

struct Interval {
  double low = 0.0;
  double high = 0.0;
};

struct Breakdown {
  std::size_t count = 0;
  std::optional<double> precision;  // absent when count == 0
  std::optional<Interval> ci;
};

struct MetricReport {
  std::size_t K = 10;
  Breakdown global, view, click;

  std::string to_json() const;
  static std::string csv_header();
  std::string csv_row(const std::string& model) const;
};

struct EvalOptions {
  std::size_t K = 10;
  std::size_t n_boot = 30;
  double level = 0.95;
  std::uint64_t seed = 0;
  std::size_t threads = 1;
};

struct Evaluation {
  std::vector<EventRecord> events;
  MetricReport report;
};

/// Percentile bootstrap interval of the mean hit rate: n_boot resamples with
/// replacement of the full list, quantiles interpolated linearly between
/// order statistics.
Interval bootstrap_ci(const std::vector<bool>& hits, std::size_t n_boot,
                      double level, Rng& rng);

/// Aggregates per-event hits into global/view/click precision with
/// bootstrap intervals (independent streams per subset).
MetricReport summarize(std::span<const EventRecord> events,
                       const EvalOptions& opts);

/// Precision@K of next-item ranking over the full vocabulary at every
/// prediction step.
Evaluation evaluate(const ModelParams<double>& params, Variant variant,
                    std::span<const EncodedSequence> sequences,
                    const EvalOptions& opts = {});

}  // namespace actrec
