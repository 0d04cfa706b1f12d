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

#include "actrec/datapipe.hpp"

#include <algorithm>
#include <cmath>
#include <sstream>

#include "json.hpp"

#include "actrec/errors.hpp"

namespace actrec {

using json = nlohmann::json;

namespace {

DataError line_error(std::size_t line_no, const std::string& what) {
  return DataError("log line " + std::to_string(line_no) + ": " + what);
}

std::string as_id(const json& v, std::size_t line_no, const char* field) {
  if (!v.is_string())
    throw line_error(line_no, std::string("\"") + field + "\" must be a string");
  return v.get<std::string>();
}

RawSession parse_record(const std::string& line, std::size_t line_no) {
  json rec;
  try {
    rec = json::parse(line);
  } catch (const json::parse_error& e) {
    throw line_error(line_no, std::string("invalid JSON (") + e.what() + ")");
  }
  if (!rec.is_object()) throw line_error(line_no, "record is not an object");
  if (!rec.contains("user_id"))
    throw line_error(line_no, "missing \"user_id\" field");
  if (!rec.contains("events"))
    throw line_error(line_no, "missing \"events\" field");
  const json& events = rec["events"];
  if (!events.is_array()) throw line_error(line_no, "\"events\" is not a list");

  RawSession s;
  s.user_id = as_id(rec["user_id"], line_no, "user_id");
  s.events.reserve(events.size());
  for (const json& ev : events) {
    if (!ev.is_object() || !ev.contains("item"))
      throw line_error(line_no, "event without \"item\" field");
    RawEvent e;
    e.item = as_id(ev["item"], line_no, "item");
    if (auto it = ev.find("recs"); it != ev.end() && !it->is_null()) {
      if (!it->is_array()) throw line_error(line_no, "\"recs\" is not a list");
      for (const json& r : *it) e.recs.push_back(as_id(r, line_no, "recs"));
    }
    s.events.push_back(std::move(e));
  }
  return s;
}

}  // namespace

ParseResult parse_log(std::istream& in) {
  ParseResult out;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.find_first_not_of(" \t") == std::string::npos) continue;
    RawSession s = parse_record(line, line_no);
    if (s.events.empty()) {
      ++out.rejected;
      continue;
    }
    out.sessions.push_back(std::move(s));
  }
  return out;
}

std::string format_session(const RawSession& session) {
  json events = json::array();
  for (const RawEvent& e : session.events) {
    json ev = {{"item", e.item}};
    if (!e.recs.empty()) ev["recs"] = e.recs;
    events.push_back(std::move(ev));
  }
  json rec = {{"user_id", session.user_id}, {"events", std::move(events)}};
  return rec.dump();
}

void write_log(std::ostream& out, std::span<const RawSession> sessions) {
  for (const RawSession& s : sessions) out << format_session(s) << '\n';
}

// ---------------------------------------------------------------------------

Vocabulary::Vocabulary(std::vector<std::string> ids) : ids_(std::move(ids)) {
  for (std::size_t i = 1; i < ids_.size(); ++i) {
    auto [it, inserted] = index_.emplace(ids_[i], static_cast<ItemIndex>(i));
    if (!inserted) throw DataError("vocabulary: duplicate id '" + ids_[i] + "'");
  }
}

Vocabulary Vocabulary::from_counts(
    const std::unordered_map<std::string, std::size_t>& counts,
    std::size_t min_count) {
  std::vector<std::pair<std::string, std::size_t>> kept;
  for (const auto& [id, n] : counts)
    if (n >= min_count && id != kRareToken) kept.emplace_back(id, n);
  if (kept.empty())
    throw DataError("vocabulary: no item reaches min_count=" +
                    std::to_string(min_count));
  std::sort(kept.begin(), kept.end(), [](const auto& a, const auto& b) {
    return a.second != b.second ? a.second > b.second : a.first < b.first;
  });
  std::vector<std::string> ids{kRareToken};
  ids.reserve(kept.size() + 1);
  for (auto& [id, n] : kept) ids.push_back(std::move(id));
  return Vocabulary(std::move(ids));
}

Vocabulary Vocabulary::load(std::istream& in) {
  std::vector<std::string> ids;
  std::string line;
  std::size_t line_no = 0;
  while (std::getline(in, line)) {
    ++line_no;
    if (!line.empty() && line.back() == '\r') line.pop_back();
    if (line.empty()) continue;
    const auto tab = line.find('\t');
    if (tab == std::string::npos)
      throw DataError("vocab line " + std::to_string(line_no) + ": missing tab");
    std::size_t idx = 0;
    try {
      idx = std::stoul(line.substr(0, tab));
    } catch (const std::exception&) {
      throw DataError("vocab line " + std::to_string(line_no) + ": bad index");
    }
    if (idx != ids.size())
      throw DataError("vocab line " + std::to_string(line_no) +
                      ": expected index " + std::to_string(ids.size()));
    ids.push_back(line.substr(tab + 1));
  }
  if (ids.size() < 2 || ids[0] != kRareToken)
    throw DataError("vocab: must start with '0\\t<RARE>' and hold >= 2 ids");
  return Vocabulary(std::move(ids));
}

void Vocabulary::save(std::ostream& out) const {
  for (std::size_t i = 0; i < ids_.size(); ++i) out << i << '\t' << ids_[i] << '\n';
}

ItemIndex Vocabulary::index_of(const std::string& raw) const {
  auto it = index_.find(raw);
  return it == index_.end() ? kRareIndex : it->second;
}

const std::string& Vocabulary::id_of(ItemIndex index) const {
  require(index >= 0 && index < size(),
          "Vocabulary::id_of: index " + std::to_string(index) + " out of range");
  return ids_[static_cast<std::size_t>(index)];
}

Vocabulary build_vocab(std::span<const RawSession> sessions,
                       std::size_t min_count) {
  require(!sessions.empty(), "build_vocab: no sessions");
  std::unordered_map<std::string, std::size_t> counts;
  for (const RawSession& s : sessions) {
    for (const RawEvent& e : s.events) {
      ++counts[e.item];
      for (const std::string& r : e.recs) ++counts[r];
    }
  }
  return Vocabulary::from_counts(counts, min_count);
}

// ---------------------------------------------------------------------------

EncodedSequence::EncodedSequence(std::vector<ItemIndex> items,
                                 std::vector<std::vector<ItemIndex>> recs)
    : items_(std::move(items)), recs_(std::move(recs)) {
  require(items_.size() == recs_.size(),
          "EncodedSequence: items and recs lengths differ");
  click_.assign(prediction_steps(), false);
  for (std::size_t t = 0; t + 1 < items_.size(); ++t) {
    const auto& r = recs_[t];
    click_[t] = std::find(r.begin(), r.end(), items_[t + 1]) != r.end();
  }
}

std::size_t EncodedSequence::click_count() const {
  return static_cast<std::size_t>(std::count(click_.begin(), click_.end(), true));
}

bool EncodedSequence::has_any_recs() const {
  return std::any_of(recs_.begin(), recs_.end(),
                     [](const auto& r) { return !r.empty(); });
}

RawSession truncate(const RawSession& session, const EncodeOptions& opts) {
  RawSession out;
  out.user_id = session.user_id;
  const std::size_t n = session.events.size();
  const std::size_t first = n > opts.max_len ? n - opts.max_len : 0;
  out.events.assign(session.events.begin() + static_cast<std::ptrdiff_t>(first),
                    session.events.end());
  for (RawEvent& e : out.events)
    if (e.recs.size() > opts.max_recs) e.recs.resize(opts.max_recs);
  return out;
}

EncodedSequence encode(const RawSession& session, const Vocabulary& vocab,
                       const EncodeOptions& opts) {
  require(!session.events.empty(), "encode: empty session");
  const RawSession cut = truncate(session, opts);
  std::vector<ItemIndex> items;
  std::vector<std::vector<ItemIndex>> recs;
  items.reserve(cut.events.size());
  recs.reserve(cut.events.size());
  for (const RawEvent& e : cut.events) {
    items.push_back(vocab.index_of(e.item));
    auto& r = recs.emplace_back();
    for (const std::string& id : e.recs) r.push_back(vocab.index_of(id));
  }
  return EncodedSequence(std::move(items), std::move(recs));
}

std::vector<EncodedSequence> encode_all(std::span<const RawSession> sessions,
                                        const Vocabulary& vocab,
                                        const EncodeOptions& opts) {
  std::vector<EncodedSequence> out;
  out.reserve(sessions.size());
  for (const RawSession& s : sessions) {
    if (s.events.empty()) continue;
    EncodedSequence e = encode(s, vocab, opts);
    if (e.length() >= 2) out.push_back(std::move(e));
  }
  return out;
}

// ---------------------------------------------------------------------------

std::vector<bool> loss_mask(const EncodedSequence& seq, MaskMode mode) {
  if (mode == MaskMode::kClicksOnly) return seq.click_target();
  return std::vector<bool>(seq.prediction_steps(), true);
}

std::size_t count_unmasked(std::span<const EncodedSequence> seqs, MaskMode mode) {
  std::size_t n = 0;
  for (const auto& s : seqs)
    n += mode == MaskMode::kAll ? s.prediction_steps() : s.click_count();
  return n;
}

std::size_t Batch::unmasked_steps() const {
  std::size_t n = 0;
  for (const auto& m : loss_mask)
    n += static_cast<std::size_t>(std::count(m.begin(), m.end(), true));
  return n;
}

BatchStream::BatchStream(std::span<const EncodedSequence> sequences,
                         std::size_t batch_size, Rng rng, MaskMode mode)
    : seqs_(sequences), batch_size_(batch_size), rng_(rng), mode_(mode) {
  require(!seqs_.empty(), "BatchStream: no sequences");
  require(batch_size_ >= 1, "BatchStream: batch_size must be >= 1");
  if (count_unmasked(seqs_, mode_) == 0)
    throw ConfigError(mode_ == MaskMode::kClicksOnly
                          ? "no click steps in training data"
                          : "no prediction steps in training data");
  order_.resize(seqs_.size());
}

void BatchStream::reshuffle() {
  for (std::size_t i = 0; i < order_.size(); ++i) order_[i] = i;
  rng_.shuffle(order_);
  pos_ = 0;
  ++epoch_;
}

Batch BatchStream::next() {
  for (;;) {
    if (epoch_ == 0 || pos_ >= order_.size()) reshuffle();
    const std::size_t end = std::min(pos_ + batch_size_, order_.size());
    Batch b;
    b.sequences.reserve(end - pos_);
    b.loss_mask.reserve(end - pos_);
    for (; pos_ < end; ++pos_) {
      const EncodedSequence& s = seqs_[order_[pos_]];
      b.sequences.emplace_back(s);
      b.loss_mask.push_back(loss_mask(s, mode_));
    }
    if (b.unmasked_steps() > 0) return b;
  }
}

std::vector<Batch> BatchStream::epoch() {
  if (epoch_ > 0 && pos_ >= order_.size()) reshuffle();
  if (epoch_ == 0) reshuffle();
  std::vector<Batch> out;
  while (pos_ < order_.size()) {
    const std::size_t end = std::min(pos_ + batch_size_, order_.size());
    Batch b;
    for (; pos_ < end; ++pos_) {
      const EncodedSequence& s = seqs_[order_[pos_]];
      b.sequences.emplace_back(s);
      b.loss_mask.push_back(loss_mask(s, mode_));
    }
    if (b.unmasked_steps() > 0) out.push_back(std::move(b));
  }
  return out;
}

}  // namespace actrec
