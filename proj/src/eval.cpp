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

#include "actrec/eval.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>

#include "json.hpp"

#include "actrec/errors.hpp"
#include "parallel.hpp"

namespace actrec {

namespace {

double mean_of(const std::vector<bool>& hits) {
  const auto n = std::count(hits.begin(), hits.end(), true);
  return static_cast<double>(n) / static_cast<double>(hits.size());
}

// Linear interpolation between order statistics of sorted values.
double quantile(const std::vector<double>& sorted, double q) {
  const double pos = q * static_cast<double>(sorted.size() - 1);
  const auto lo = static_cast<std::size_t>(std::floor(pos));
  const auto hi = std::min(lo + 1, sorted.size() - 1);
  const double frac = pos - static_cast<double>(lo);
  return sorted[lo] + frac * (sorted[hi] - sorted[lo]);
}

Breakdown breakdown(const std::vector<bool>& hits, const EvalOptions& opts,
                    Rng rng) {
  Breakdown b;
  b.count = hits.size();
  if (hits.empty()) return b;
  const double p = mean_of(hits);
  b.precision = p;
  Interval ci = bootstrap_ci(hits, opts.n_boot, opts.level, rng);
  // Keep the point estimate inside the reported interval.
  ci.low = std::min(ci.low, p);
  ci.high = std::max(ci.high, p);
  b.ci = ci;
  return b;
}

std::string fmt(const std::optional<double>& v) {
  if (!v) return "";
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.6f", *v);
  return buf;
}

nlohmann::json breakdown_json(const Breakdown& b) {
  nlohmann::json j = {{"count", b.count}};
  j["precision"] = b.precision ? nlohmann::json(*b.precision) : nlohmann::json();
  if (b.ci)
    j["ci"] = {b.ci->low, b.ci->high};
  else
    j["ci"] = nullptr;
  return j;
}

}  // namespace

Interval bootstrap_ci(const std::vector<bool>& hits, std::size_t n_boot,
                      double level, Rng& rng) {
  require(!hits.empty(), "bootstrap_ci: empty hit list");
  require(n_boot >= 1, "bootstrap_ci: n_boot must be >= 1");
  require(level > 0.0 && level < 1.0, "bootstrap_ci: level must lie in (0, 1)");
  const std::size_t n = hits.size();
  std::vector<double> means;
  means.reserve(n_boot);
  for (std::size_t b = 0; b < n_boot; ++b) {
    std::size_t count = 0;
    for (std::size_t i = 0; i < n; ++i) count += hits[rng.below(n)] ? 1 : 0;
    means.push_back(static_cast<double>(count) / static_cast<double>(n));
  }
  std::sort(means.begin(), means.end());
  const double alpha = (1.0 - level) / 2.0;
  return {quantile(means, alpha), quantile(means, 1.0 - alpha)};
}

MetricReport summarize(std::span<const EventRecord> events,
                       const EvalOptions& opts) {
  std::vector<bool> all, view, click;
  all.reserve(events.size());
  for (const EventRecord& e : events) {
    all.push_back(e.hit);
    (e.kind == EventKind::kClick ? click : view).push_back(e.hit);
  }
  const Rng root(opts.seed);
  MetricReport r;
  r.K = opts.K;
  r.global = breakdown(all, opts, root.derive(0));
  r.view = breakdown(view, opts, root.derive(1));
  r.click = breakdown(click, opts, root.derive(2));
  return r;
}

Evaluation evaluate(const ModelParams<double>& params, Variant variant,
                    std::span<const EncodedSequence> sequences,
                    const EvalOptions& opts) {
  require(opts.K >= 1 && static_cast<Index>(opts.K) <= params.vocab_size(),
          "evaluate: K must lie in [1, V_x]");
  std::vector<std::vector<EventRecord>> per_seq(sequences.size());
  detail::parallel_for(sequences.size(), opts.threads, [&](std::size_t i) {
    const EncodedSequence& seq = sequences[i];
    require(seq.length() >= 2, "evaluate: sequence needs at least two events");
    const Tape<double> tp = forward(params, seq, variant);
    auto& out = per_seq[i];
    out.reserve(seq.prediction_steps());
    for (std::size_t t = 0; t < seq.prediction_steps(); ++t) {
      EventRecord e;
      e.sequence = i;
      e.step = t;
      e.target = seq.items()[t + 1];
      e.hit = in_topk(tp.logits.col(static_cast<Index>(t)), e.target,
                      static_cast<Index>(opts.K));
      e.kind = seq.click_target()[t] ? EventKind::kClick : EventKind::kView;
      out.push_back(e);
    }
  });
  Evaluation ev;
  for (auto& v : per_seq) ev.events.insert(ev.events.end(), v.begin(), v.end());
  ev.report = summarize(ev.events, opts);
  return ev;
}

std::string MetricReport::to_json() const {
  nlohmann::json j = {{"K", K},
                      {"global", breakdown_json(global)},
                      {"view", breakdown_json(view)},
                      {"click", breakdown_json(click)}};
  return j.dump();
}

std::string MetricReport::csv_header() {
  return "model,K,global,view,click,ci_global_lo,ci_global_hi,ci_view_lo,"
         "ci_view_hi,ci_click_lo,ci_click_hi,n_view,n_click";
}

std::string MetricReport::csv_row(const std::string& model) const {
  auto lo = [](const Breakdown& b) {
    return fmt(b.ci ? std::optional<double>(b.ci->low) : std::nullopt);
  };
  auto hi = [](const Breakdown& b) {
    return fmt(b.ci ? std::optional<double>(b.ci->high) : std::nullopt);
  };
  return model + "," + std::to_string(K) + "," + fmt(global.precision) + "," +
         fmt(view.precision) + "," + fmt(click.precision) + "," + lo(global) +
         "," + hi(global) + "," + lo(view) + "," + hi(view) + "," + lo(click) +
         "," + hi(click) + "," + std::to_string(view.count) + "," +
         std::to_string(click.count);
}

}  // namespace actrec
