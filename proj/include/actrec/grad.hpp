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
#include <cmath>
#include <span>
#include <string>
#include <vector>

#include "actrec/model.hpp"

namespace actrec {

template <class Scalar>
struct LossAndGrads {
  Scalar loss;
  Gradients<Scalar> grads;
};

namespace detail {

template <class Scalar>
void check_mask(const EncodedSequence& seq, const std::vector<bool>& mask) {
  require(seq.length() >= 2, "backward: sequence needs at least two events");
  require(mask.size() == seq.prediction_steps(),
          "backward: mask length " + std::to_string(mask.size()) +
              " != T-1 = " + std::to_string(seq.prediction_steps()));
}

// Pushes d(loss)/d(gate_t) back into W_a and the embedding columns of the
// recommended items (mean pooling divides by k_t).
template <class Scalar, class GDerived>
void backprop_action(const ModelParams<Scalar>& p, const Tape<Scalar>& tp,
                     Index t, const std::vector<ItemIndex>& recs,
                     const Eigen::MatrixBase<GDerived>& d_gate,
                     Gradients<Scalar>& g) {
  g.W_a.noalias() += d_gate * tp.a_emb.col(t).transpose();
  const Vector<Scalar> d_a =
      (p.W_a.transpose() * d_gate) / Scalar(recs.size());
  for (ItemIndex j : recs) g.V_embed.col(j) += d_a;
}

}  // namespace detail

/// Sum over unmasked steps of -log softmax(logits_t)[items[t+1]] and its
/// exact gradient by backpropagation through time. `grads` is overwritten.
template <class Scalar>
Scalar backward(const ModelParams<Scalar>& p, const EncodedSequence& seq,
                Variant variant, const std::vector<bool>& mask,
                Gradients<Scalar>& grads) {
  detail::check_mask<Scalar>(seq, mask);
  if (grads.vocab_size() != p.vocab_size() ||
      grads.embed_dim() != p.embed_dim() ||
      grads.hidden_dim() != p.hidden_dim())
    grads = Gradients<Scalar>::zeros(p.vocab_size(), p.embed_dim(), p.hidden_dim());
  else
    grads.set_zero();

  std::vector<Index> cols;
  for (std::size_t t = 0; t < mask.size(); ++t)
    if (mask[t]) cols.push_back(static_cast<Index>(t));
  if (cols.empty()) return Scalar(0);

  const Index steps = static_cast<Index>(seq.prediction_steps());
  const Index k = p.hidden_dim();
  const Tape<Scalar> tp = unroll(p, seq, variant, steps, false);

  // Output layer over unmasked steps only.
  const Index n = static_cast<Index>(cols.size());
  Matrix<Scalar> h_used(k, n);
  for (Index c = 0; c < n; ++c) h_used.col(c) = tp.h_out.col(cols[c]);
  Matrix<Scalar> d_logits = p.W_out * h_used;
  d_logits.colwise() += p.b_out;

  Scalar loss(0);
  for (Index c = 0; c < n; ++c) {
    const auto target = seq.items()[static_cast<std::size_t>(cols[c] + 1)];
    auto col = d_logits.col(c);
    if (!all_finite(col))
      throw NumericError("backward: non-finite logits at step " +
                         std::to_string(cols[c]));
    const Scalar lse = log_sum_exp(col);
    loss += lse - col(target);
    col = (col.array() - lse).exp().matrix();
    col(target) -= Scalar(1);
  }
  grads.W_out.noalias() = d_logits * h_used.transpose();
  grads.b_out = d_logits.rowwise().sum();
  Matrix<Scalar> d_h_out = Matrix<Scalar>::Zero(k, steps);
  {
    const Matrix<Scalar> d_used = p.W_out.transpose() * d_logits;
    for (Index c = 0; c < n; ++c) d_h_out.col(cols[c]) = d_used.col(c);
  }

  // Backpropagation through time; d_carry is dL/dh_{t+1} via later steps.
  Vector<Scalar> d_carry = Vector<Scalar>::Zero(k);
  for (Index t = steps - 1; t >= 0; --t) {
    const auto st = static_cast<std::size_t>(t);
    const auto& recs = seq.recs()[st];
    const bool act = tp.has_action[st];

    Vector<Scalar> d_h_next = d_carry;
    if (act && uses_late_fusion(variant)) {
      d_h_next += d_h_out.col(t).cwiseProduct(tp.gate.col(t));
      detail::backprop_action(p, tp, t, recs,
                              d_h_out.col(t).cwiseProduct(tp.h_next.col(t)), grads);
    } else {
      d_h_next += d_h_out.col(t);
    }

    // GRU cell.
    const auto z = tp.z.col(t).array();
    const auto r = tp.r.col(t).array();
    const auto c = tp.h_cand.col(t).array();
    const auto h_in = tp.h_in.col(t);
    const auto x = tp.x_emb.col(t);

    const Vector<Scalar> da_h =
        (d_h_next.array() * z * (Scalar(1) - c.square())).matrix();
    const Vector<Scalar> da_z =
        (d_h_next.array() * (c - h_in.array()) * z * (Scalar(1) - z)).matrix();
    const Vector<Scalar> rh = (r * h_in.array()).matrix();
    const Vector<Scalar> d_rh = p.U_h.transpose() * da_h;
    const Vector<Scalar> da_r =
        (d_rh.array() * h_in.array() * r * (Scalar(1) - r)).matrix();

    Vector<Scalar> d_h_in = (d_h_next.array() * (Scalar(1) - z)).matrix();
    d_h_in.array() += d_rh.array() * r;
    d_h_in.noalias() += p.U_z.transpose() * da_z;
    d_h_in.noalias() += p.U_r.transpose() * da_r;

    grads.W_h.noalias() += da_h * x.transpose();
    grads.W_z.noalias() += da_z * x.transpose();
    grads.W_r.noalias() += da_r * x.transpose();
    grads.U_h.noalias() += da_h * rh.transpose();
    grads.U_z.noalias() += da_z * h_in.transpose();
    grads.U_r.noalias() += da_r * h_in.transpose();
    grads.b_h += da_h;
    grads.b_z += da_z;
    grads.b_r += da_r;

    Vector<Scalar> d_x = p.W_h.transpose() * da_h;
    d_x.noalias() += p.W_z.transpose() * da_z;
    d_x.noalias() += p.W_r.transpose() * da_r;
    grads.V_embed.col(seq.items()[st]) += d_x;

    if (act && uses_early_fusion(variant)) {
      d_carry = d_h_in.cwiseProduct(tp.gate.col(t));
      detail::backprop_action(p, tp, t, recs,
                              d_h_in.cwiseProduct(tp.h_prev.col(t)), grads);
    } else {
      d_carry = std::move(d_h_in);
    }
    if (!all_finite(d_carry))
      throw NumericError("backward: non-finite state gradient at step " +
                         std::to_string(t));
  }
  return loss;
}

template <class Scalar>
LossAndGrads<Scalar> backward(const ModelParams<Scalar>& p,
                              const EncodedSequence& seq, Variant variant,
                              const std::vector<bool>& mask) {
  LossAndGrads<Scalar> out{Scalar(0), Gradients<Scalar>{}};
  out.loss = backward(p, seq, variant, mask, out.grads);
  return out;
}

/// Masked negative log-likelihood from a plain forward pass.
template <class Scalar>
Scalar sequence_loss(const ModelParams<Scalar>& p, const EncodedSequence& seq,
                     Variant variant, const std::vector<bool>& mask) {
  detail::check_mask<Scalar>(seq, mask);
  const Tape<Scalar> tp = forward(p, seq, variant);
  Scalar loss(0);
  for (Index t = 0; t < tp.steps; ++t) {
    if (!mask[static_cast<std::size_t>(t)]) continue;
    const auto target = seq.items()[static_cast<std::size_t>(t + 1)];
    loss += log_sum_exp(tp.logits.col(t)) - tp.logits(target, t);
  }
  return loss;
}

struct FdReport {
  double max_rel_error = 0.0;
  std::string worst_tensor;
  Index worst_entry = -1;
  Index checked = 0;
};

inline double fd_relative_error(double analytic, double numeric) {
  return std::abs(analytic - numeric) /
         std::max(1e-8, std::abs(analytic) + std::abs(numeric));
}

/// Central finite differences on every scalar parameter against the given
/// analytic gradients. Losses are evaluated in `OracleScalar` (extended
/// precision by default) so that round-off in L(θ±ε) stays well below the
/// 1e-8 floor of the relative error. Intended for small models only.
template <class OracleScalar = long double, class Scalar>
FdReport fd_compare(const ModelParams<Scalar>& params,
                    const Gradients<Scalar>& analytic,
                    const EncodedSequence& seq, Variant variant,
                    const std::vector<bool>& mask, double epsilon = 1e-5) {
  ModelParams<OracleScalar> probe = params.template cast<OracleScalar>();
  const auto eps = OracleScalar(epsilon);
  FdReport rep;
  visit_tensors(
      [&](const std::string& name, auto& w, const auto& g) {
        for (Index i = 0; i < w.size(); ++i) {
          const OracleScalar saved = w.data()[i];
          w.data()[i] = saved + eps;
          const OracleScalar up = sequence_loss(probe, seq, variant, mask);
          w.data()[i] = saved - eps;
          const OracleScalar down = sequence_loss(probe, seq, variant, mask);
          w.data()[i] = saved;
          const double numeric = double((up - down) / (OracleScalar(2) * eps));
          const double err = fd_relative_error(double(g.data()[i]), numeric);
          ++rep.checked;
          if (rep.worst_entry < 0 || err > rep.max_rel_error) {
            rep.max_rel_error = err;
            rep.worst_tensor = name;
            rep.worst_entry = i;
          }
        }
      },
      probe, analytic);
  return rep;
}

template <class Scalar>
FdReport fd_check(const ModelParams<Scalar>& params, const EncodedSequence& seq,
                  Variant variant, const std::vector<bool>& mask,
                  double epsilon = 1e-5) {
  Gradients<Scalar> g;
  backward(params, seq, variant, mask, g);
  return fd_compare(params, g, seq, variant, mask, epsilon);
}

}  // namespace actrec
