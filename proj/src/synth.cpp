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

#include "actrec/synth.hpp"

#include <algorithm>
#include <cmath>

#include "json.hpp"

#include "actrec/errors.hpp"
#include "actrec/rng.hpp"

namespace actrec {

namespace {

void check(bool ok, const char* field, const std::string& why) {
  if (!ok) throw ContractViolation(std::string("synth: ") + field + " " + why);
}

class Catalog {
 public:
  explicit Catalog(const SynthConfig& c) : n_clusters_(c.n_clusters) {
    cdf_.resize(n_clusters_);
    for (std::size_t cl = 0; cl < n_clusters_; ++cl) {
      const std::size_t size = cluster_size(c.V, cl);
      auto& cdf = cdf_[cl];
      cdf.reserve(size);
      double acc = 0.0;
      for (std::size_t r = 0; r < size; ++r) {
        acc += std::pow(static_cast<double>(r + 1), -c.zipf_s);
        cdf.push_back(acc);
      }
      for (double& v : cdf) v /= acc;
    }
  }

  std::size_t cluster_of(std::size_t item) const { return item % n_clusters_; }
  std::size_t item_at(std::size_t cluster, std::size_t rank) const {
    return cluster + rank * n_clusters_;
  }

  std::size_t draw(std::size_t cluster, Rng& rng) const {
    const auto& cdf = cdf_[cluster];
    const double u = rng.uniform();
    const auto it = std::upper_bound(cdf.begin(), cdf.end(), u);
    const auto rank = std::min<std::size_t>(
        static_cast<std::size_t>(it - cdf.begin()), cdf.size() - 1);
    return item_at(cluster, rank);
  }

  static std::size_t cluster_size(std::size_t V, std::size_t n_clusters,
                                  std::size_t cl) {
    return V / n_clusters + (cl < V % n_clusters ? 1 : 0);
  }

 private:
  std::size_t cluster_size(std::size_t V, std::size_t cl) const {
    return cluster_size(V, n_clusters_, cl);
  }

  std::size_t n_clusters_;
  std::vector<std::vector<double>> cdf_;
};

}  // namespace

void SynthConfig::validate() const {
  check(V >= 1, "V", "must be >= 1");
  check(n_clusters >= 1 && n_clusters <= V, "n_clusters", "must lie in [1, V]");
  check(len_min >= 1 && len_min <= len_max, "len_min",
        "must satisfy 1 <= len_min <= len_max");
  check(zipf_s >= 0.0 && std::isfinite(zipf_s), "zipf_s", "must be >= 0");
  check(p_intra >= 0.0 && p_intra <= 1.0, "p_intra", "must lie in [0, 1]");
  check(rec_rate >= 0.0 && rec_rate <= 1.0, "rec_rate", "must lie in [0, 1]");
  check(p_follow >= 0.0 && p_follow <= 1.0, "p_follow", "must lie in [0, 1]");
  check(slate_size >= 1 && slate_size <= 5, "slate_size", "must lie in [1, 5]");
  check(slate_size <= Catalog::cluster_size(V, n_clusters, n_clusters - 1),
        "slate_size", "exceeds the smallest cluster (V / n_clusters items)");
}

std::string synth_item_id(std::size_t i) { return "item" + std::to_string(i); }

void SynthTruth::write(std::ostream& out) const {
  for (const auto& steps : driven_steps) out << nlohmann::json(steps).dump() << '\n';
}

SynthLog generate(const SynthConfig& c) {
  c.validate();
  const Catalog catalog(c);
  const Rng root(c.seed);

  // Blackbox policy: top slate_size items of the neighbouring cluster.
  std::vector<std::vector<std::string>> slates(c.n_clusters);
  std::vector<std::vector<std::size_t>> slate_items(c.n_clusters);
  for (std::size_t cl = 0; cl < c.n_clusters; ++cl) {
    const std::size_t target = (cl + 1) % c.n_clusters;
    for (std::size_t r = 0; r < c.slate_size; ++r) {
      slate_items[cl].push_back(catalog.item_at(target, r));
      slates[cl].push_back(synth_item_id(slate_items[cl].back()));
    }
  }

  auto organic = [&](std::size_t item, Rng& rng) {
    std::size_t cl = catalog.cluster_of(item);
    if (c.n_clusters > 1 && !rng.bernoulli(c.p_intra)) {
      const std::size_t shift = 1 + rng.below(c.n_clusters - 1);
      cl = (cl + shift) % c.n_clusters;
    }
    return catalog.draw(cl, rng);
  };

  SynthLog log;
  log.sessions.resize(c.n_sessions);
  log.truth.driven_steps.resize(c.n_sessions);
  for (std::size_t s = 0; s < c.n_sessions; ++s) {
    Rng rng = root.derive(s);
    RawSession& session = log.sessions[s];
    session.user_id = "u" + std::to_string(s);
    const std::size_t len = c.len_min + rng.below(c.len_max - c.len_min + 1);
    std::size_t item = catalog.draw(rng.below(c.n_clusters), rng);
    session.events.reserve(len);
    for (std::size_t t = 0; t < len; ++t) {
      RawEvent& ev = session.events.emplace_back();
      ev.item = synth_item_id(item);
      if (t + 1 == len) break;
      std::size_t next;
      if (rng.bernoulli(c.rec_rate)) {
        const std::size_t cl = catalog.cluster_of(item);
        ev.recs = slates[cl];
        if (rng.bernoulli(c.p_follow)) {
          next = slate_items[cl][rng.below(c.slate_size)];
          log.truth.driven_steps[s].push_back(t);
        } else {
          next = organic(item, rng);
        }
      } else {
        next = organic(item, rng);
      }
      item = next;
    }
  }
  return log;
}

}  // namespace actrec
