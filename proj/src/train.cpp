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

#include "actrec/train.hpp"

#include <chrono>
#include <cmath>
#include <cstdio>

#include "actrec/adam.hpp"
#include "actrec/errors.hpp"
#include "actrec/grad.hpp"
#include "parallel.hpp"

namespace actrec {

void TrainConfig::validate() const {
  if (d < 1 || k < 1) throw ConfigError("d and k must be >= 1");
  if (batch_size < 1) throw ConfigError("batch_size must be >= 1");
  if (iterations < 1) throw ConfigError("iterations must be >= 1");
  if (!(lr_end > 0.0)) throw ConfigError("lr_end must be > 0");
  if (!(lr_start >= lr_end)) throw ConfigError("lr_start must be >= lr_end");
  if (threads < 1) throw ConfigError("threads must be >= 1");
}

NllResult nll_loss(const Matrix<double>& logits,
                   std::span<const ItemIndex> targets,
                   const std::vector<bool>& mask) {
  require(static_cast<std::size_t>(logits.cols()) == targets.size() &&
              targets.size() == mask.size(),
          "nll_loss: logits, targets and mask disagree in length");
  NllResult r;
  for (Index t = 0; t < logits.cols(); ++t) {
    if (!mask[static_cast<std::size_t>(t)]) continue;
    const auto target = targets[static_cast<std::size_t>(t)];
    require(target >= 0 && target < logits.rows(), "nll_loss: target out of range");
    if (!all_finite(logits.col(t)))
      throw NumericError("nll_loss: non-finite logits at step " + std::to_string(t));
    r.sum += log_sum_exp(logits.col(t)) - logits(target, t);
    ++r.count;
  }
  return r;
}

double lr_schedule(const TrainConfig& config, std::size_t step) {
  require(step <= config.iterations, "lr_schedule: step beyond iterations");
  if (step == 0) return config.lr_start;
  if (step == config.iterations) return config.lr_end;
  const double ratio = config.lr_start / config.lr_end;
  const double c = (ratio * ratio - 1.0) / static_cast<double>(config.iterations);
  return config.lr_start / std::sqrt(1.0 + c * static_cast<double>(step));
}

void TrainHistory::write_csv(std::ostream& out) const {
  out << "iteration,loss,lr,seconds\n";
  char buf[128];
  for (const HistoryEntry& e : entries) {
    std::snprintf(buf, sizeof buf, "%zu,%.17g,%.17g,%.3f\n", e.iteration,
                  e.loss, e.lr, e.seconds);
    out << buf;
  }
}

double batch_gradient(const ModelParams<double>& params, const Batch& batch,
                      Variant variant, std::size_t threads,
                      Gradients<double>& total) {
  const std::size_t n = batch.sequences.size();
  total = Gradients<double>::zeros(params.vocab_size(), params.embed_dim(),
                                   params.hidden_dim());
  double loss = 0.0;
  if (threads <= 1 || n <= 1) {
    Gradients<double> g;
    for (std::size_t i = 0; i < n; ++i) {
      loss += backward(params, batch.sequences[i].get(), variant,
                       batch.loss_mask[i], g);
      total += g;
    }
    return loss;
  }
  std::vector<Gradients<double>> per_seq(n);
  std::vector<double> losses(n, 0.0);
  detail::parallel_for(n, threads, [&](std::size_t i) {
    losses[i] = backward(params, batch.sequences[i].get(), variant,
                         batch.loss_mask[i], per_seq[i]);
  });
  for (std::size_t i = 0; i < n; ++i) {
    loss += losses[i];
    total += per_seq[i];
  }
  return loss;
}

TrainResult train(const TrainConfig& config,
                  std::span<const EncodedSequence> train_data,
                  Index vocab_size, const TrainHook& hook) {
  config.validate();
  if (train_data.empty()) throw ConfigError("training data is empty");

  Rng root(config.seed);
  Rng init_rng = root.derive(0);
  TrainResult result;
  result.params =
      ModelParams<double>::glorot(init_rng, vocab_size, config.d, config.k);
  BatchStream stream(train_data, config.batch_size, root.derive(1),
                     config.effective_mask());
  AdamState<ModelParams<double>> adam(result.params);

  const auto start = std::chrono::steady_clock::now();
  Gradients<double> grads;
  for (std::size_t it = 0; it < config.iterations; ++it) {
    const Batch batch = stream.next();
    const double count = static_cast<double>(batch.unmasked_steps());
    double loss_sum = 0.0;
    try {
      loss_sum = batch_gradient(result.params, batch, config.variant,
                                config.threads, grads);
      if (!std::isfinite(loss_sum))
        throw NumericError("non-finite loss at iteration " + std::to_string(it));
      grads *= 1.0 / count;
      const double lr = lr_schedule(config, it);
      adam_step(result.params, grads, adam, lr);
      const double secs = std::chrono::duration<double>(
                              std::chrono::steady_clock::now() - start)
                              .count();
      result.history.entries.push_back({it, loss_sum / count, lr, secs});
    } catch (const NumericError& e) {
      result.diverged = true;
      result.message = e.what();
      return result;
    }
    if (hook && config.eval_every > 0 && (it + 1) % config.eval_every == 0)
      hook(it + 1, result.params);
  }
  return result;
}

}  // namespace actrec
