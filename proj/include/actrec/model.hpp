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

#include <algorithm>
#include <optional>
#include <span>
#include <string>
#include <string_view>
#include <type_traits>
#include <vector>

#include "actrec/datapipe.hpp"
#include "actrec/numkernel.hpp"

namespace actrec {

enum class Variant { kNavigation, kEarly, kLate, kClicks };

inline std::string_view variant_name(Variant v) {
  switch (v) {
    case Variant::kNavigation: return "navigation";
    case Variant::kEarly: return "early";
    case Variant::kLate: return "late";
    case Variant::kClicks: return "clicks";
  }
  return "?";
}

inline std::optional<Variant> parse_variant(std::string_view s) {
  for (Variant v : {Variant::kNavigation, Variant::kEarly, Variant::kLate,
                    Variant::kClicks})
    if (variant_name(v) == s) return v;
  return std::nullopt;
}

/// Clicks RNN shares the late-fusion architecture; it differs only in the
/// training mask.
inline bool uses_late_fusion(Variant v) {
  return v == Variant::kLate || v == Variant::kClicks;
}
inline bool uses_early_fusion(Variant v) { return v == Variant::kEarly; }

/// Learnable tensors. One embedding table serves visited and recommended
/// items; the output layer is untied.
template <class Scalar = double>
struct ModelParams {
  Matrix<Scalar> V_embed;         // d x V
  Matrix<Scalar> W_z, W_r, W_h;   // k x d
  Matrix<Scalar> U_z, U_r, U_h;   // k x k
  Vector<Scalar> b_z, b_r, b_h;   // k
  Matrix<Scalar> W_a;             // k x d, action projection
  Matrix<Scalar> W_out;           // V x k
  Vector<Scalar> b_out;           // V

  Index vocab_size() const { return V_embed.cols(); }
  Index embed_dim() const { return V_embed.rows(); }
  Index hidden_dim() const { return U_z.rows(); }

  static ModelParams zeros(Index vocab, Index d, Index k) {
    ModelParams p;
    p.V_embed = Matrix<Scalar>::Zero(d, vocab);
    p.W_z = p.W_r = p.W_h = Matrix<Scalar>::Zero(k, d);
    p.U_z = p.U_r = p.U_h = Matrix<Scalar>::Zero(k, k);
    p.b_z = p.b_r = p.b_h = Vector<Scalar>::Zero(k);
    p.W_a = Matrix<Scalar>::Zero(k, d);
    p.W_out = Matrix<Scalar>::Zero(vocab, k);
    p.b_out = Vector<Scalar>::Zero(vocab);
    return p;
  }

  /// Glorot-uniform weight matrices, zero biases. Draw order follows the
  /// tensor order of visit_tensors.
  static ModelParams glorot(Rng& rng, Index vocab, Index d, Index k) {
    require(vocab >= 2 && d >= 1 && k >= 1, "ModelParams: bad dimensions");
    ModelParams p = zeros(vocab, d, k);
    visit_tensors(
        [&rng](const std::string&, auto& t) {
          if (t.cols() > 1) t = glorot_init<Scalar>(rng, t.rows(), t.cols());
        },
        p);
    return p;
  }

  void set_zero() {
    visit_tensors([](const std::string&, auto& t) { t.setZero(); }, *this);
  }

  Index parameter_count() const {
    Index n = 0;
    visit_tensors([&n](const std::string&, const auto& t) { n += t.size(); },
                  *this);
    return n;
  }

  ModelParams& operator+=(const ModelParams& o) {
    visit_tensors([](const std::string&, auto& a, const auto& b) { a += b; },
                  *this, o);
    return *this;
  }

  ModelParams& operator*=(Scalar s) {
    visit_tensors([s](const std::string&, auto& a) { a *= s; }, *this);
    return *this;
  }

  template <class Other>
  ModelParams<Other> cast() const {
    ModelParams<Other> out;
    out.V_embed = V_embed.template cast<Other>();
    out.W_z = W_z.template cast<Other>();
    out.W_r = W_r.template cast<Other>();
    out.W_h = W_h.template cast<Other>();
    out.U_z = U_z.template cast<Other>();
    out.U_r = U_r.template cast<Other>();
    out.U_h = U_h.template cast<Other>();
    out.b_z = b_z.template cast<Other>();
    out.b_r = b_r.template cast<Other>();
    out.b_h = b_h.template cast<Other>();
    out.W_a = W_a.template cast<Other>();
    out.W_out = W_out.template cast<Other>();
    out.b_out = b_out.template cast<Other>();
    return out;
  }

  bool operator==(const ModelParams& o) const {
    bool eq = true;
    visit_tensors(
        [&eq](const std::string&, const auto& a, const auto& b) {
          eq = eq && a.rows() == b.rows() && a.cols() == b.cols() && a == b;
        },
        *this, o);
    return eq;
  }
};

template <class T>
struct is_model_params : std::false_type {};
template <class S>
struct is_model_params<ModelParams<S>> : std::true_type {};

/// Calls f(name, p.x, q.x, ...) for every tensor, in checkpoint order.
template <class F, class... P>
  requires(is_model_params<std::remove_cvref_t<P>>::value && ...)
void visit_tensors(F&& f, P&&... p) {
  f("V_embed", p.V_embed...);
  f("W_z", p.W_z...);
  f("W_r", p.W_r...);
  f("W_h", p.W_h...);
  f("U_z", p.U_z...);
  f("U_r", p.U_r...);
  f("U_h", p.U_h...);
  f("b_z", p.b_z...);
  f("b_r", p.b_r...);
  f("b_h", p.b_h...);
  f("W_a", p.W_a...);
  f("W_out", p.W_out...);
  f("b_out", p.b_out...);
}

template <class Scalar>
using Gradients = ModelParams<Scalar>;

// ---------------------------------------------------------------------------
// Building blocks

template <class Scalar>
auto embed_item(const ModelParams<Scalar>& p, ItemIndex index) {
  require(index >= 0 && index < p.vocab_size(),
          "embed_item: index " + std::to_string(index) + " out of range");
  return p.V_embed.col(index);
}

/// Mean of the embedded recommended items, summed in ascending index order
/// so that any permutation of the list gives bit-identical output.
template <class Scalar>
Vector<Scalar> action_repr(const ModelParams<Scalar>& p,
                           std::span<const ItemIndex> recs) {
  require(!recs.empty(), "action_repr: empty recommendation list");
  std::vector<ItemIndex> sorted(recs.begin(), recs.end());
  std::sort(sorted.begin(), sorted.end());
  Vector<Scalar> a = Vector<Scalar>::Zero(p.embed_dim());
  for (ItemIndex j : sorted) a += embed_item(p, j);
  return a / Scalar(sorted.size());
}

template <class Scalar>
struct GruStep {
  Vector<Scalar> h_next, z, r, h_cand;
};

/// z = s(W_z x + U_z h + b_z), r = s(W_r x + U_r h + b_r),
/// c = tanh(W_h x + U_h (r*h) + b_h), h' = (1 - z)*h + z*c.
template <class Scalar, class XDerived, class HDerived>
GruStep<Scalar> gru_cell(const ModelParams<Scalar>& p,
                         const Eigen::MatrixBase<XDerived>& x,
                         const Eigen::MatrixBase<HDerived>& h) {
  require(x.size() == p.embed_dim() && h.size() == p.hidden_dim(),
          "gru_cell: shape mismatch");
  GruStep<Scalar> s;
  s.z = (p.W_z * x + p.U_z * h + p.b_z).unaryExpr(&sigmoid<Scalar>);
  s.r = (p.W_r * x + p.U_r * h + p.b_r).unaryExpr(&sigmoid<Scalar>);
  s.h_cand = (p.W_h * x + p.U_h * s.r.cwiseProduct(h) + p.b_h).array().tanh().matrix();
  s.h_next = (Scalar(1) - s.z.array()) * h.array() + s.z.array() * s.h_cand.array();
  return s;
}

/// h * (W_a a): the multiplicative state-action fusion.
template <class Scalar, class HDerived, class ADerived>
Vector<Scalar> fuse(const Eigen::MatrixBase<HDerived>& h,
                    const Eigen::MatrixBase<ADerived>& a_emb,
                    const Matrix<Scalar>& W_a) {
  require(W_a.rows() == h.size() && W_a.cols() == a_emb.size(),
          "fuse: shape mismatch");
  return h.cwiseProduct(W_a * a_emb);
}

template <class Scalar, class HDerived>
Vector<Scalar> output_logits(const ModelParams<Scalar>& p,
                             const Eigen::MatrixBase<HDerived>& h) {
  require(h.size() == p.hidden_dim(), "output_logits: shape mismatch");
  return p.W_out * h + p.b_out;
}

// ---------------------------------------------------------------------------
// Unrolled recurrence

/// Activations of an unrolled pass; column t describes step t, which consumes
/// items[t] and recs[t] and predicts items[t+1].
template <class Scalar>
struct Tape {
  Index steps = 0;
  std::vector<bool> has_action;
  Matrix<Scalar> x_emb;    // d x steps
  Matrix<Scalar> a_emb;    // d x steps, zero where no action
  Matrix<Scalar> gate;     // k x steps, W_a a_t, zero where no action
  Matrix<Scalar> h_prev;   // k x steps, recurrent state h_t entering the step
  Matrix<Scalar> h_in;     // k x steps, GRU input state (early-fused h_t)
  Matrix<Scalar> h_next;   // k x steps, h_{t+1}
  Matrix<Scalar> h_out;    // k x steps, state fed to the output layer
  Matrix<Scalar> z, r, h_cand;
  Matrix<Scalar> logits;   // V x steps; empty when not requested
};

/// Runs `steps` transitions (steps <= T). The recurrent state always
/// carries the unfused h_{t+1}; late fusion only touches the output path.
template <class Scalar>
Tape<Scalar> unroll(const ModelParams<Scalar>& p, const EncodedSequence& seq,
                    Variant variant, Index steps, bool with_logits) {
  require(steps >= 0 && steps <= static_cast<Index>(seq.length()),
          "unroll: too many steps");
  const Index d = p.embed_dim(), k = p.hidden_dim();
  Tape<Scalar> tp;
  tp.steps = steps;
  tp.has_action.assign(static_cast<std::size_t>(steps), false);
  tp.x_emb.resize(d, steps);
  tp.a_emb = Matrix<Scalar>::Zero(d, steps);
  tp.gate = Matrix<Scalar>::Zero(k, steps);
  tp.h_prev.resize(k, steps);
  tp.h_in.resize(k, steps);
  tp.h_next.resize(k, steps);
  tp.h_out.resize(k, steps);
  tp.z.resize(k, steps);
  tp.r.resize(k, steps);
  tp.h_cand.resize(k, steps);

  Vector<Scalar> h = Vector<Scalar>::Zero(k);
  for (Index t = 0; t < steps; ++t) {
    const auto st = static_cast<std::size_t>(t);
    const auto& recs = seq.recs()[st];
    const bool act = !recs.empty() && variant != Variant::kNavigation;
    tp.has_action[st] = act;
    tp.x_emb.col(t) = embed_item(p, seq.items()[st]);
    if (act) {
      tp.a_emb.col(t) = action_repr(p, std::span<const ItemIndex>(recs));
      tp.gate.col(t) = p.W_a * tp.a_emb.col(t);
    }
    tp.h_prev.col(t) = h;
    if (act && uses_early_fusion(variant))
      tp.h_in.col(t) = h.cwiseProduct(tp.gate.col(t));
    else
      tp.h_in.col(t) = h;

    GruStep<Scalar> g = gru_cell(p, tp.x_emb.col(t), tp.h_in.col(t));
    tp.z.col(t) = g.z;
    tp.r.col(t) = g.r;
    tp.h_cand.col(t) = g.h_cand;
    tp.h_next.col(t) = g.h_next;
    if (act && uses_late_fusion(variant))
      tp.h_out.col(t) = g.h_next.cwiseProduct(tp.gate.col(t));
    else
      tp.h_out.col(t) = g.h_next;
    h = std::move(g.h_next);
  }
  if (with_logits) {
    tp.logits = p.W_out * tp.h_out;
    tp.logits.colwise() += p.b_out;
  }
  return tp;
}

/// One logits column per prediction step t = 0..T-2.
template <class Scalar>
Tape<Scalar> forward(const ModelParams<Scalar>& p, const EncodedSequence& seq,
                     Variant variant) {
  require(seq.length() >= 2, "forward: sequence needs at least two events");
  return unroll(p, seq, variant, static_cast<Index>(seq.prediction_steps()), true);
}

/// Scores for the item following the last event, given that event's recs.
template <class Scalar>
Vector<Scalar> next_item_logits(const ModelParams<Scalar>& p,
                                const EncodedSequence& seq, Variant variant) {
  require(seq.length() >= 1, "next_item_logits: empty sequence");
  Tape<Scalar> tp = unroll(p, seq, variant, static_cast<Index>(seq.length()), false);
  return output_logits(p, tp.h_out.col(tp.steps - 1));
}

}  // namespace actrec
