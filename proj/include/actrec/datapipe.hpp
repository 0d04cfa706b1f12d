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
#include <functional>
#include <istream>
#include <ostream>
#include <span>
#include <string>
#include <unordered_map>
#include <utility>
#include <vector>

#include "actrec/errors.hpp"
#include "actrec/rng.hpp"

namespace actrec {

using ItemIndex = std::int32_t;

struct RawEvent {
  std::string item;
  std::vector<std::string> recs;  // display order

  bool operator==(const RawEvent&) const = default;
};

struct RawSession {
  std::string user_id;
  std::vector<RawEvent> events;  // ascending time

  bool operator==(const RawSession&) const = default;
};

struct ParseResult {
  std::vector<RawSession> sessions;
  std::size_t rejected = 0;  // records with an empty events list
};

/// Reads line-delimited JSON session records:
///   {"user_id": "...", "events": [{"item": "...", "recs": [...]}, ...]}
/// Blank lines are skipped. Throws DataError naming the 1-based line number
/// of the first malformed record.
ParseResult parse_log(std::istream& in);

/// Inverse of parse_log for one record (no trailing newline).
std::string format_session(const RawSession& session);
void write_log(std::ostream& out, std::span<const RawSession> sessions);

class Vocabulary {
 public:
  static constexpr ItemIndex kRareIndex = 0;
  static constexpr const char* kRareToken = "<RARE>";

  /// Ids are ordered by descending count, then ascending raw id.
  static Vocabulary from_counts(
      const std::unordered_map<std::string, std::size_t>& counts,
      std::size_t min_count);

  /// Reads the `index<TAB>raw_id` format written by save().
  static Vocabulary load(std::istream& in);
  void save(std::ostream& out) const;

  ItemIndex index_of(const std::string& raw) const;
  /// Raw id for a dense index; kRareToken for the rare index.
  const std::string& id_of(ItemIndex index) const;
  bool contains(const std::string& raw) const { return index_.count(raw) != 0; }
  ItemIndex size() const { return static_cast<ItemIndex>(ids_.size()); }

  bool operator==(const Vocabulary& o) const { return ids_ == o.ids_; }

 private:
  explicit Vocabulary(std::vector<std::string> ids);

  std::vector<std::string> ids_;  // ids_[0] is the rare token
  std::unordered_map<std::string, ItemIndex> index_;
};

/// Counts every appearance of an id, as visited item or inside a rec list,
/// on the untruncated sessions. Throws DataError if no id reaches min_count.
Vocabulary build_vocab(std::span<const RawSession> sessions,
                       std::size_t min_count = 10);

class EncodedSequence {
 public:
  EncodedSequence(std::vector<ItemIndex> items,
                  std::vector<std::vector<ItemIndex>> recs);

  std::size_t length() const { return items_.size(); }
  std::size_t prediction_steps() const {
    return items_.empty() ? 0 : items_.size() - 1;
  }
  const std::vector<ItemIndex>& items() const { return items_; }
  const std::vector<std::vector<ItemIndex>>& recs() const { return recs_; }
  /// click_target()[t] is true iff recs[t] is non-empty and contains items[t+1].
  const std::vector<bool>& click_target() const { return click_; }
  std::size_t click_count() const;
  bool has_any_recs() const;

  bool operator==(const EncodedSequence&) const = default;

 private:
  std::vector<ItemIndex> items_;
  std::vector<std::vector<ItemIndex>> recs_;
  std::vector<bool> click_;
};

struct EncodeOptions {
  std::size_t max_len = 40;
  std::size_t max_recs = 5;
};

/// Keeps the latest max_len events and the first max_recs entries of each
/// rec list.
RawSession truncate(const RawSession& session, const EncodeOptions& opts = {});

EncodedSequence encode(const RawSession& session, const Vocabulary& vocab,
                       const EncodeOptions& opts = {});

/// Encodes every session and drops those left with fewer than two events.
std::vector<EncodedSequence> encode_all(std::span<const RawSession> sessions,
                                        const Vocabulary& vocab,
                                        const EncodeOptions& opts = {});

template <class T>
struct Split {
  std::vector<T> train;
  std::vector<T> valid;
};

/// Random session-level partition; the validation part has
/// floor(n * valid_fraction) elements. Both parts keep input order.
template <class T>
Split<T> split(std::span<const T> items, double valid_fraction, Rng& rng) {
  require(valid_fraction > 0.0 && valid_fraction < 1.0,
          "split: valid_fraction must lie in (0, 1)");
  const std::size_t n = items.size();
  const auto n_valid = static_cast<std::size_t>(
      std::floor(static_cast<double>(n) * valid_fraction));
  std::vector<std::size_t> perm(n);
  for (std::size_t i = 0; i < n; ++i) perm[i] = i;
  rng.shuffle(perm);
  std::vector<bool> is_valid(n, false);
  for (std::size_t i = 0; i < n_valid; ++i) is_valid[perm[i]] = true;
  Split<T> out;
  out.valid.reserve(n_valid);
  out.train.reserve(n - n_valid);
  for (std::size_t i = 0; i < n; ++i)
    (is_valid[i] ? out.valid : out.train).push_back(items[i]);
  return out;
}

enum class MaskMode { kAll, kClicksOnly };

std::vector<bool> loss_mask(const EncodedSequence& seq, MaskMode mode);
std::size_t count_unmasked(std::span<const EncodedSequence> seqs, MaskMode mode);

struct Batch {
  std::vector<std::reference_wrapper<const EncodedSequence>> sequences;
  std::vector<std::vector<bool>> loss_mask;  // one per sequence, T-1 each

  std::size_t unmasked_steps() const;
};

/// Endless minibatch stream over a fixed corpus. Each epoch visits the
/// sequences in a fresh random order; the last batch of an epoch may be
/// short. Batches without any unmasked step are skipped.
class BatchStream {
 public:
  BatchStream(std::span<const EncodedSequence> sequences,
              std::size_t batch_size, Rng rng, MaskMode mode);

  Batch next();
  /// All batches of one epoch, in order (advances the stream by one epoch).
  std::vector<Batch> epoch();
  std::size_t epochs_started() const { return epoch_; }

 private:
  void reshuffle();

  std::span<const EncodedSequence> seqs_;
  std::size_t batch_size_;
  Rng rng_;
  MaskMode mode_;
  std::vector<std::size_t> order_;
  std::size_t pos_ = 0;
  std::size_t epoch_ = 0;
};

}  // namespace actrec
