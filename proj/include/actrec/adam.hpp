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

#include <cmath>
#include <cstdint>
#include <string>

#include "actrec/numkernel.hpp"

namespace actrec {

// A tensor set is any type T for which an ADL-visible
//   visit_tensors(F&& f, T& a, T& b, ...)
// calls f(name, a.x, b.x, ...) once per member tensor, in a fixed order.
// ModelParams is the main instance; tests define their own.

struct AdamConfig {
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
};

template <class Params>
struct AdamState {
  Params m;
  Params v;
  std::int64_t t = 0;

  explicit AdamState(const Params& shape_like) : m(shape_like), v(shape_like) {
    visit_tensors([](const std::string&, auto& a, auto& b) {
      a.setZero();
      b.setZero();
    }, m, v);
  }
};

/// One bias-corrected Adam update. Gradients are checked for finiteness
/// before any parameter is touched.
template <class Params>
void adam_step(Params& params, const Params& grads, AdamState<Params>& state,
               double lr, const AdamConfig& cfg = {}) {
  visit_tensors(
      [](const std::string& name, const auto& p, const auto& g) {
        require(p.rows() == g.rows() && p.cols() == g.cols(),
                "adam_step: shape mismatch for " + name);
        if (!all_finite(g))
          throw NumericError("adam_step: non-finite gradient in " + name);
      },
      params, grads);

  state.t += 1;
  const double c1 = 1.0 - std::pow(cfg.beta1, static_cast<double>(state.t));
  const double c2 = 1.0 - std::pow(cfg.beta2, static_cast<double>(state.t));
  visit_tensors(
      [&](const std::string&, auto& p, const auto& g, auto& m, auto& v) {
        using S = typename std::decay_t<decltype(p)>::Scalar;
        m = S(cfg.beta1) * m + S(1 - cfg.beta1) * g;
        v.array() = S(cfg.beta2) * v.array() + S(1 - cfg.beta2) * g.array().square();
        p.array() -= S(lr) * (m.array() / S(c1)) /
                     ((v.array() / S(c2)).sqrt() + S(cfg.eps));
      },
      params, grads, state.m, state.v);
}

}  // namespace actrec
