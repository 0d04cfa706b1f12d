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

#include <algorithm>
#include <cmath>

#include "actrec/model.hpp"
#include "support.hpp"

using namespace actrec;
using actrec::testing::random_params;
using actrec::testing::random_sequence;

namespace {

constexpr Variant kVariants[] = {Variant::kNavigation, Variant::kEarly,
                                 Variant::kLate, Variant::kClicks};

// Scalar-loop GRU, written independently of the Eigen expressions.
void gru_oracle(const ModelParams<double>& p, const std::vector<double>& x,
                const std::vector<double>& h, std::vector<double>& out) {
  const Index k = p.hidden_dim(), d = p.embed_dim();
  std::vector<double> z(k), r(k);
  for (Index i = 0; i < k; ++i) {
    double az = p.b_z(i), ar = p.b_r(i);
    for (Index j = 0; j < d; ++j) {
      az += p.W_z(i, j) * x[j];
      ar += p.W_r(i, j) * x[j];
    }
    for (Index j = 0; j < k; ++j) {
      az += p.U_z(i, j) * h[j];
      ar += p.U_r(i, j) * h[j];
    }
    z[i] = 1.0 / (1.0 + std::exp(-az));
    r[i] = 1.0 / (1.0 + std::exp(-ar));
  }
  out.assign(k, 0.0);
  for (Index i = 0; i < k; ++i) {
    double a = p.b_h(i);
    for (Index j = 0; j < d; ++j) a += p.W_h(i, j) * x[j];
    for (Index j = 0; j < k; ++j) a += p.U_h(i, j) * r[j] * h[j];
    out[i] = (1.0 - z[i]) * h[i] + z[i] * std::tanh(a);
  }
}

}  // namespace

TEST_CASE("embed_item is a column lookup") {
  auto p = ModelParams<double>::zeros(4, 4, 2);
  p.V_embed.setIdentity();
  CHECK(embed_item(p, 2) == Vector<double>::Unit(4, 2));

  auto q = ModelParams<double>::zeros(4, 3, 2);
  q.V_embed << 1, 2, 3, 4, 5, 6, 7, 8, 9, 10, 11, 12;
  Vector<double> col(3);
  col << 2, 6, 10;
  CHECK(embed_item(q, 1) == col);
  CHECK(embed_item(q, 1) == embed_item(q, 1));
  CHECK_THROWS_AS(embed_item(q, 4), ContractViolation);
  CHECK_THROWS_AS(embed_item(q, -1), ContractViolation);
}

TEST_CASE("action_repr mean pooling") {
  auto p = ModelParams<double>::zeros(6, 4, 2);
  p.V_embed.setIdentity();
  std::vector<ItemIndex> one{3};
  CHECK(action_repr(p, std::span<const ItemIndex>(one)) == embed_item(p, 3));
  std::vector<ItemIndex> two{0, 1};
  auto a = action_repr(p, std::span<const ItemIndex>(two));
  CHECK(a(0) == 0.5);
  CHECK(a(1) == 0.5);
  CHECK(a(2) == 0.0);
  std::vector<ItemIndex> none;
  CHECK_THROWS_AS(action_repr(p, std::span<const ItemIndex>(none)), ContractViolation);

  // Bit-identical under permutation, with values that are not exactly
  // associative in floating point.
  Rng rng(1);
  auto q = random_params(rng, 20, 8, 4);
  std::vector<ItemIndex> recs{4, 17, 9, 2, 11};
  const auto base = action_repr(q, std::span<const ItemIndex>(recs));
  std::sort(recs.begin(), recs.end());
  do {
    CHECK((action_repr(q, std::span<const ItemIndex>(recs)).array() == base.array()).all());
  } while (std::next_permutation(recs.begin(), recs.end()));
}

TEST_CASE("gru_cell") {
  SUBCASE("all-zero weights halve the state") {
    auto p = ModelParams<double>::zeros(5, 3, 4);
    Vector<double> x = Vector<double>::Random(3), h = Vector<double>::Random(4);
    auto s = gru_cell(p, x, h);
    CHECK(s.z.isApprox(Vector<double>::Constant(4, 0.5)));
    CHECK(s.r.isApprox(Vector<double>::Constant(4, 0.5)));
    CHECK(s.h_cand.isZero(0.0));
    CHECK((s.h_next - 0.5 * h).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("zero state with input weights only") {
    Rng rng(2);
    auto p = ModelParams<double>::zeros(5, 3, 4);
    p.W_z = glorot_init(rng, 4, 3);
    p.W_h = glorot_init(rng, 4, 3);
    p.W_r = glorot_init(rng, 4, 3);
    Vector<double> x(3);
    x << 0.3, -1.2, 0.8;
    auto s = gru_cell(p, x, Vector<double>::Zero(4));
    Vector<double> z = (p.W_z * x).unaryExpr([](double v) { return 1 / (1 + std::exp(-v)); });
    Vector<double> c = (p.W_h * x).array().tanh().matrix();
    CHECK((s.h_next - z.cwiseProduct(c)).cwiseAbs().maxCoeff() < 1e-15);
  }
  SUBCASE("matches scalar oracle") {
    Rng rng(3);
    for (int rep = 0; rep < 20; ++rep) {
      auto p = random_params(rng, 10, 5, 6, 2.0);
      std::vector<double> x(5), h(6), ref;
      for (auto& v : x) v = rng.uniform(-1, 1);
      for (auto& v : h) v = rng.uniform(-1, 1);
      gru_oracle(p, x, h, ref);
      auto s = gru_cell(p, Eigen::Map<Vector<double>>(x.data(), 5),
                        Eigen::Map<Vector<double>>(h.data(), 6));
      for (Index i = 0; i < 6; ++i) CHECK(std::abs(s.h_next(i) - ref[i]) < 1e-12);
    }
  }
}

TEST_CASE("fuse") {
  Matrix<double> W_a = Matrix<double>::Zero(2, 2);
  W_a(0, 0) = 3.0;
  W_a(1, 1) = 0.5;
  Vector<double> h(2), a(2);
  h << 1, 2;
  a << 1, 1;
  Vector<double> expect(2);
  expect << 3, 1;
  CHECK(fuse(h, a, W_a) == expect);
  CHECK(fuse(h, Vector<double>::Zero(2), W_a).isZero(0.0));
  Matrix<double> ones_gate(2, 1);
  ones_gate << 1, 1;
  Vector<double> unit = Vector<double>::Ones(1);
  CHECK(fuse(h, unit, ones_gate) == h);
  CHECK_THROWS_AS(fuse(h, Vector<double>::Zero(3), W_a), ContractViolation);
}

TEST_CASE("output_logits") {
  auto p = ModelParams<double>::zeros(4, 2, 2);
  p.b_out << 1, 2, 3, 4;
  CHECK(output_logits(p, Vector<double>::Zero(2)) == p.b_out);

  p.b_out.setZero();
  p.W_out.topRows(2).setIdentity();
  Vector<double> h(2);
  h << 0.25, -0.5;
  Vector<double> padded(4);
  padded << 0.25, -0.5, 0, 0;
  CHECK(output_logits(p, h) == padded);

  p.W_out << 1, 2, 3, 4, 5, 6, 7, 8;
  p.b_out << 0.5, 0, 0, -1;
  Vector<double> expect(4);
  expect << 0.25 - 1 + 0.5, 0.75 - 2, 1.25 - 3, 1.75 - 4 - 1;
  CHECK(output_logits(p, h) == expect);
}

TEST_CASE("forward shapes and contracts") {
  Rng rng(4);
  auto p = random_params(rng, 12, 4, 5);
  auto seq = random_sequence(rng, 12, 3, {0});
  for (Variant v : kVariants) {
    auto tp = forward(p, seq, v);
    CHECK(tp.steps == 2);
    CHECK(tp.logits.cols() == 2);
    CHECK(tp.logits.rows() == 12);
    CHECK(tp.h_prev.col(0).isZero(0.0));
  }
  EncodedSequence single({1}, {{}});
  CHECK_THROWS_AS(forward(p, single, Variant::kLate), ContractViolation);
  CHECK(next_item_logits(p, single, Variant::kLate).size() == 12);
}

TEST_CASE("no-action equivalence across variants") {
  Rng rng(5);
  for (int rep = 0; rep < 10; ++rep) {
    auto p = random_params(rng, 30, 6, 7);
    auto seq = random_sequence(rng, 30, 2 + rng.below(20), {});
    const auto ref = forward(p, seq, Variant::kNavigation).logits;
    for (Variant v : kVariants)
      CHECK((forward(p, seq, v).logits.array() == ref.array()).all());
  }
}

TEST_CASE("rec-list permutation leaves outputs bit-identical") {
  Rng rng(6);
  for (int rep = 0; rep < 10; ++rep) {
    auto p = random_params(rng, 30, 6, 7);
    auto seq = random_sequence(rng, 30, 8, {0, 3, 5});
    auto recs = seq.recs();
    for (auto& r : recs) std::reverse(r.begin(), r.end());
    if (!recs[3].empty()) std::rotate(recs[3].begin(), recs[3].begin() + 1, recs[3].end());
    EncodedSequence permuted(seq.items(), recs);
    for (Variant v : kVariants)
      CHECK((forward(p, seq, v).logits.array() ==
             forward(p, permuted, v).logits.array()).all());
  }
}

TEST_CASE("late fusion changes only the output path") {
  Rng rng(7);
  auto p = random_params(rng, 30, 6, 7);
  auto seq = random_sequence(rng, 30, 7, {1, 4});
  const auto nav = forward(p, seq, Variant::kNavigation);
  const auto late = forward(p, seq, Variant::kLate);
  CHECK((late.h_next.array() == nav.h_next.array()).all());
  for (Index t = 0; t < nav.steps; ++t) {
    const bool rec = t == 1 || t == 4;
    const bool same = (late.logits.col(t).array() == nav.logits.col(t).array()).all();
    CHECK(same == !rec);
  }

  // Zeroing W_a: logits collapse to b_out at rec steps only.
  auto z = p;
  z.W_a.setZero();
  const auto zeroed = forward(z, seq, Variant::kLate);
  CHECK((zeroed.h_next.array() == late.h_next.array()).all());
  for (Index t = 0; t < nav.steps; ++t) {
    if (t == 1 || t == 4)
      CHECK(zeroed.logits.col(t) == z.b_out);
    else
      CHECK((zeroed.logits.col(t).array() == late.logits.col(t).array()).all());
  }
}

TEST_CASE("early fusion propagates the action into later states") {
  Rng rng(8);
  for (int rep = 0; rep < 10; ++rep) {
    auto p = random_params(rng, 30, 6, 7);
    auto seq = random_sequence(rng, 30, 8, {2});
    auto recs = seq.recs();
    recs[2] = {static_cast<ItemIndex>((recs[2][0] + 1) % 30)};
    EncodedSequence other(seq.items(), recs);
    const auto a = forward(p, seq, Variant::kEarly);
    const auto b = forward(p, other, Variant::kEarly);
    for (Index t = 0; t < a.steps; ++t) {
      const double diff = (a.h_next.col(t) - b.h_next.col(t)).cwiseAbs().maxCoeff();
      if (t < 2)
        CHECK(diff == 0.0);
      else
        CHECK(diff > 0.0);
    }
  }
}

TEST_CASE("hidden states stay inside the unit box") {
  Rng rng(9);
  for (int rep = 0; rep < 20; ++rep) {
    auto p = random_params(rng, 25, 6, 7, 3.0);
    auto seq = random_sequence(rng, 25, 40, {1, 5, 9, 20, 33});
    for (Variant v : {Variant::kNavigation, Variant::kLate}) {
      const auto tp = forward(p, seq, v);
      CHECK(tp.h_next.cwiseAbs().maxCoeff() < 1.0);
    }
  }
}
