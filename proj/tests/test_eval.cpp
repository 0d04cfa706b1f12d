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

#include "doctest.h"

#include <cmath>

#include "actrec/errors.hpp"
#include "actrec/eval.hpp"
#include "support.hpp"

using namespace actrec;
using actrec::testing::random_params;
using actrec::testing::random_sequence;

namespace {

// A navigation model that has memorized the successor rule x -> x+1 mod V:
// the GRU copies the one-hot input into the state and the output layer maps
// it to the successor.
ModelParams<double> successor_model(Index V) {
  auto p = ModelParams<double>::zeros(V, V, V);
  p.V_embed.setIdentity();
  p.b_z.setConstant(30.0);
  p.W_h = 10.0 * Matrix<double>::Identity(V, V);
  for (Index x = 0; x < V; ++x) p.W_out((x + 1) % V, x) = 10.0;
  return p;
}

std::vector<EncodedSequence> successor_corpus(Rng& rng, ItemIndex V, std::size_t n) {
  std::vector<EncodedSequence> out;
  for (std::size_t s = 0; s < n; ++s) {
    const std::size_t T = 2 + rng.below(10);
    std::vector<ItemIndex> items(T);
    std::vector<std::vector<ItemIndex>> recs(T);
    items[0] = static_cast<ItemIndex>(rng.below(V));
    for (std::size_t t = 1; t < T; ++t) items[t] = (items[t - 1] + 1) % V;
    for (std::size_t t = 0; t + 1 < T; ++t)
      if (rng.bernoulli(0.3)) recs[t] = {items[t + 1], static_cast<ItemIndex>(rng.below(V))};
    out.emplace_back(std::move(items), std::move(recs));
  }
  return out;
}

}  // namespace

TEST_CASE("bootstrap_ci") {
  Rng rng(1);
  CHECK(bootstrap_ci(std::vector<bool>(50, true), 30, 0.95, rng).low == 1.0);
  CHECK(bootstrap_ci(std::vector<bool>(50, true), 30, 0.95, rng).high == 1.0);
  auto zero = bootstrap_ci(std::vector<bool>(50, false), 30, 0.95, rng);
  CHECK(zero.low == 0.0);
  CHECK(zero.high == 0.0);
  CHECK_THROWS_AS(bootstrap_ci({}, 30, 0.95, rng), ContractViolation);

  std::vector<bool> mixed(1000, false);
  for (std::size_t i = 0; i < 500; ++i) mixed[2 * i] = true;
  for (std::uint64_t seed = 0; seed < 200; ++seed) {
    Rng r(seed);
    auto ci = bootstrap_ci(mixed, 30, 0.95, r);
    CHECK(ci.low >= 0.40);
    CHECK(ci.high <= 0.60);
    CHECK(ci.low <= 0.5);
    CHECK(ci.high >= 0.5);
  }
  Rng a(9), b(9);
  auto ca = bootstrap_ci(mixed, 30, 0.95, a);
  auto cb = bootstrap_ci(mixed, 30, 0.95, b);
  CHECK(ca.low == cb.low);
  CHECK(ca.high == cb.high);
}

TEST_CASE("perfect memorization scores 1 everywhere") {
  Rng rng(2);
  const ItemIndex V = 12;
  auto model = successor_model(V);
  auto data = successor_corpus(rng, V, 200);
  EvalOptions opts;
  opts.K = 1;
  auto ev = evaluate(model, Variant::kNavigation, data, opts);
  REQUIRE(ev.report.click.count > 0);
  CHECK(*ev.report.global.precision == 1.0);
  CHECK(*ev.report.view.precision == 1.0);
  CHECK(*ev.report.click.precision == 1.0);
}

TEST_CASE("untrained model is calibrated at K / V") {
  Rng rng(3);
  auto p = ModelParams<double>::glorot(rng, 100, 40, 40);
  std::vector<EncodedSequence> data;
  std::size_t events = 0;
  while (events < 20000) {
    data.push_back(random_sequence(rng, 100, 20, {}));
    events += 19;
  }
  auto ev = evaluate(p, Variant::kNavigation, data);
  CHECK(ev.events.size() == events);
  CHECK(std::abs(*ev.report.global.precision - 0.1) < 0.02);
}

TEST_CASE("report identities") {
  Rng rng(4);
  auto p = random_params(rng, 40, 8, 8, 3.0);
  std::vector<EncodedSequence> data;
  std::size_t total = 0;
  for (int i = 0; i < 300; ++i) {
    const std::size_t T = 2 + rng.below(12);
    data.push_back(random_sequence(rng, 40, T, {0, 1}, true));
    total += T - 1;
  }
  for (Variant v : {Variant::kNavigation, Variant::kLate}) {
    double prev = -1.0;
    for (std::size_t K : {1u, 3u, 10u, 40u}) {
      EvalOptions opts;
      opts.K = K;
      auto ev = evaluate(p, v, data, opts);
      const auto& r = ev.report;
      CHECK(ev.events.size() == total);
      CHECK(r.view.count + r.click.count == r.global.count);
      const double weighted =
          (*r.view.precision * double(r.view.count) +
           *r.click.precision * double(r.click.count)) / double(r.global.count);
      CHECK(std::abs(weighted - *r.global.precision) < 1e-12);
      for (const Breakdown* b : {&r.global, &r.view, &r.click}) {
        CHECK(b->ci->low >= 0.0);
        CHECK(b->ci->high <= 1.0);
        CHECK(b->ci->low <= *b->precision);
        CHECK(*b->precision <= b->ci->high);
      }
      CHECK(*r.global.precision >= prev);
      prev = *r.global.precision;
      if (K == 40) CHECK(*r.global.precision == 1.0);
    }
  }
}

TEST_CASE("click breakdown is absent without rec events") {
  Rng rng(5);
  auto p = random_params(rng, 20, 4, 4);
  std::vector<EncodedSequence> data{random_sequence(rng, 20, 6, {}),
                                    random_sequence(rng, 20, 4, {})};
  auto r = evaluate(p, Variant::kLate, data).report;
  CHECK(r.click.count == 0);
  CHECK_FALSE(r.click.precision.has_value());
  CHECK_FALSE(r.click.ci.has_value());
  CHECK(r.view.count == 8);
  const std::string row = r.csv_row("late");
  CHECK(row.find(",,") != std::string::npos);
  CHECK(row.substr(row.size() - 4) == ",8,0");
}

TEST_CASE("csv layout") {
  CHECK(MetricReport::csv_header() ==
        "model,K,global,view,click,ci_global_lo,ci_global_hi,ci_view_lo,"
        "ci_view_hi,ci_click_lo,ci_click_hi,n_view,n_click");
  MetricReport r;
  r.K = 10;
  r.global = {4, 0.5, Interval{0.25, 0.75}};
  r.view = {3, 1.0 / 3, Interval{0.0, 0.5}};
  r.click = {1, 1.0, Interval{1.0, 1.0}};
  CHECK(r.csv_row("m") ==
        "m,10,0.500000,0.333333,1.000000,0.250000,0.750000,0.000000,0.500000,"
        "1.000000,1.000000,3,1");
  CHECK(r.to_json().find("\"click\"") != std::string::npos);
}

TEST_CASE("evaluation is deterministic and thread-independent") {
  Rng rng(6);
  auto p = random_params(rng, 30, 6, 6);
  std::vector<EncodedSequence> data;
  for (int i = 0; i < 50; ++i) data.push_back(random_sequence(rng, 30, 7, {2, 3}, true));
  EvalOptions one, four;
  four.threads = 4;
  auto a = evaluate(p, Variant::kEarly, data, one).report;
  auto b = evaluate(p, Variant::kEarly, data, four).report;
  CHECK(a.csv_row("x") == b.csv_row("x"));
}
