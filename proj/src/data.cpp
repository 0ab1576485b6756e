// SPDX-License-Identifier: Apache-2.0
#include "sslseq/data.hpp"

#include <algorithm>
#include <cmath>
#include <set>
#include <stdexcept>
#include <unordered_map>

namespace sslseq::data {

std::string to_string(const BinarizationRule& rule) {
  if (rule.kind == BinarizationRule::Kind::per_participant_zscore) return "zscore";
  return "threshold:" + std::to_string(rule.threshold);
}

BinarizationRule parse_binarization_rule(const std::string& text) {
  if (text == "zscore") return BinarizationRule::zscore();
  if (text == "smile") return BinarizationRule::smile();
  if (text == "crosscheck") return BinarizationRule::crosscheck();
  const std::string prefix = "threshold:";
  if (text.rfind(prefix, 0) == 0) {
    return {BinarizationRule::Kind::threshold, std::stoi(text.substr(prefix.size()))};
  }
  throw std::invalid_argument("unknown binarization rule '" + text + "'");
}

void Dataset::reindex() {
  labeled_index.clear();
  unlabeled_index.clear();
  for (std::size_t i = 0; i < windows.size(); ++i) {
    (windows[i].labeled() ? labeled_index : unlabeled_index).push_back(i);
  }
}

void Dataset::validate() const {
  const int t = steps();
  const int f = feature_count();
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const auto& w = windows[i];
    if (w.steps() != t || w.feature_count() != f) {
      throw std::invalid_argument("window " + std::to_string(i) + " has shape " +
                                  std::to_string(w.steps()) + "x" + std::to_string(w.feature_count()) +
                                  ", dataset expects " + std::to_string(t) + "x" + std::to_string(f));
    }
    if (!w.features.allFinite()) {
      throw std::invalid_argument("window " + std::to_string(i) + " contains missing values");
    }
    if (w.raw_level && !w.label) {
      throw std::invalid_argument("window " + std::to_string(i) + " has a raw level but no label");
    }
    if (w.raw_level && rule.kind == BinarizationRule::Kind::threshold &&
        binarize_level(*w.raw_level, rule) != *w.label) {
      throw std::invalid_argument("window " + std::to_string(i) +
                                  " label disagrees with the binarization rule");
    }
  }
  std::vector<char> seen(windows.size(), 0);
  for (auto i : labeled_index) {
    if (i >= windows.size() || seen[i]++) throw std::invalid_argument("labeled index invalid or duplicated");
    if (!windows[i].labeled()) throw std::invalid_argument("labeled index points at an unlabeled window");
  }
  for (auto i : unlabeled_index) {
    if (i >= windows.size() || seen[i]++) throw std::invalid_argument("unlabeled index invalid or overlaps labeled");
    if (windows[i].labeled()) throw std::invalid_argument("unlabeled index points at a labeled window");
  }
  if (std::find(seen.begin(), seen.end(), 0) != seen.end()) {
    throw std::invalid_argument("index sets do not cover every window");
  }
}

std::vector<std::string> Dataset::participants() const {
  std::set<std::string> ids;
  for (const auto& w : windows) ids.insert(w.participant_id);
  return {ids.begin(), ids.end()};
}

int Split::fold_of(const std::string& participant) const {
  auto it = assignments.find(participant);
  if (it == assignments.end()) throw std::out_of_range("participant '" + participant + "' not in split");
  return it->second;
}

std::vector<std::size_t> Split::train_windows(const Dataset& ds, int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ds.windows.size(); ++i) {
    if (fold_of(ds.windows[i].participant_id) != fold) out.push_back(i);
  }
  return out;
}

std::vector<std::size_t> Split::validation_windows(const Dataset& ds, int fold) const {
  std::vector<std::size_t> out;
  for (std::size_t i = 0; i < ds.windows.size(); ++i) {
    if (fold_of(ds.windows[i].participant_id) == fold) out.push_back(i);
  }
  return out;
}

BinaryLabel binarize_level(int raw_level, const BinarizationRule& rule) {
  if (rule.kind != BinarizationRule::Kind::threshold) {
    throw std::invalid_argument("z-score binarization needs the participant's level history");
  }
  return raw_level <= rule.threshold ? BinaryLabel::non_stressed : BinaryLabel::stressed;
}

BinarizeResult binarize(const std::vector<std::pair<std::string, int>>& raw_levels,
                        const BinarizationRule& rule) {
  if (raw_levels.empty()) throw std::invalid_argument("binarize: no raw levels");
  BinarizeResult out;
  out.labels.reserve(raw_levels.size());
  if (rule.kind == BinarizationRule::Kind::threshold) {
    for (const auto& [pid, level] : raw_levels) out.labels.push_back(binarize_level(level, rule));
  } else {
    std::map<std::string, std::vector<int>> by_participant;
    for (const auto& [pid, level] : raw_levels) by_participant[pid].push_back(level);
    std::map<std::string, double> mean;
    for (const auto& [pid, levels] : by_participant) {
      if (std::all_of(levels.begin(), levels.end(), [&](int v) { return v == levels.front(); })) {
        throw DegenerateParticipantError(pid);
      }
      double s = 0.0;
      for (int v : levels) s += v;
      mean[pid] = s / static_cast<double>(levels.size());
    }
    // z > 0 exactly when the level is above the participant mean.
    for (const auto& [pid, level] : raw_levels) {
      out.labels.push_back(static_cast<double>(level) > mean[pid] ? BinaryLabel::stressed
                                                                 : BinaryLabel::non_stressed);
    }
  }
  for (auto l : out.labels) (l == BinaryLabel::stressed ? out.stressed : out.non_stressed)++;
  return out;
}

Split make_splits(const std::vector<std::string>& participants, int fold_count, RngSeed seed) {
  if (fold_count < 2) throw std::invalid_argument("make_splits: fold_count must be >= 2");
  std::vector<std::string> ids = participants;
  std::sort(ids.begin(), ids.end());
  ids.erase(std::unique(ids.begin(), ids.end()), ids.end());
  if (static_cast<int>(ids.size()) < fold_count) {
    throw std::invalid_argument("make_splits: " + std::to_string(ids.size()) + " participants cannot fill " +
                                std::to_string(fold_count) + " folds");
  }
  Rng rng(derive_seed(seed.value, 0x5917));
  shuffle(ids, rng);
  Split split;
  split.fold_count = fold_count;
  for (std::size_t i = 0; i < ids.size(); ++i) split.assignments[ids[i]] = static_cast<int>(i % fold_count);
  return split;
}

Split make_splits(const Dataset& dataset, int fold_count, RngSeed seed) {
  return make_splits(dataset.participants(), fold_count, seed);
}

SegmentResult segment(const std::vector<ParticipantStream>& streams,
                      const std::vector<std::string>& feature_names, int length,
                      int resolution_minutes, const std::vector<LabelEvent>& labels,
                      const BinarizationRule& rule) {
  if (length < 1) throw std::invalid_argument("segment: length must be >= 1");
  if (resolution_minutes < 1) throw std::invalid_argument("segment: resolution must be >= 1 minute");
  const std::size_t nf = feature_names.size();
  const Timestamp res = static_cast<Timestamp>(resolution_minutes) * 60;

  std::vector<BinaryLabel> binary;
  if (!labels.empty()) {
    std::vector<std::pair<std::string, int>> raw;
    raw.reserve(labels.size());
    for (const auto& l : labels) raw.emplace_back(l.participant_id, l.raw_level);
    binary = binarize(raw, rule).labels;
  }
  std::unordered_map<std::string, std::vector<std::size_t>> labels_of;
  for (std::size_t i = 0; i < labels.size(); ++i) labels_of[labels[i].participant_id].push_back(i);

  SegmentResult result;
  result.dataset.feature_names = feature_names;
  result.dataset.step_minutes = resolution_minutes;
  result.dataset.rule = rule;
  std::set<std::string> seen_streams;

  for (const auto& stream : streams) {
    if (!seen_streams.insert(stream.participant_id).second) {
      throw std::invalid_argument("segment: duplicate stream for participant '" + stream.participant_id + "'");
    }
    auto& label_ids = labels_of[stream.participant_id];
    if (stream.rows.empty()) {
      result.unmatched_labels += label_ids.size();
      continue;
    }
    const Timestamp t0 = stream.rows.front().time;
    std::map<std::int64_t, const StreamRow*> slots;
    Timestamp prev = t0 - 1;
    for (const auto& row : stream.rows) {
      if (row.time <= prev) {
        throw std::invalid_argument("segment: timestamps not strictly increasing for '" +
                                    stream.participant_id + "'");
      }
      prev = row.time;
      if ((row.time - t0) % res != 0) {
        throw std::invalid_argument("segment: row off the " + std::to_string(resolution_minutes) +
                                    "-minute grid for '" + stream.participant_id + "'");
      }
      const bool complete = row.values.size() == nf &&
                            std::all_of(row.values.begin(), row.values.end(),
                                        [](double v) { return std::isfinite(v); });
      if (complete) slots[(row.time - t0) / res] = &row;
    }
    const std::int64_t last_slot = (stream.rows.back().time - t0) / res;

    auto build = [&](std::int64_t end_slot) -> std::optional<Mat> {
      if (end_slot - length + 1 < 0) return std::nullopt;
      Mat m(length, static_cast<Eigen::Index>(nf));
      for (int k = 0; k < length; ++k) {
        auto it = slots.find(end_slot - length + 1 + k);
        if (it == slots.end()) return std::nullopt;
        for (std::size_t f = 0; f < nf; ++f) m(k, static_cast<Eigen::Index>(f)) = it->second->values[f];
      }
      return m;
    };

    std::set<std::int64_t> labeled_slots;
    for (auto li : label_ids) {
      const auto& ev = labels[li];
      if (ev.time < t0) {
        ++result.unmatched_labels;
        continue;
      }
      const std::int64_t end_slot = (ev.time - t0) / res;
      labeled_slots.insert(end_slot);
      auto m = build(end_slot);
      if (!m) {
        ++result.unmatched_labels;
        continue;
      }
      SequenceWindow w;
      w.participant_id = stream.participant_id;
      w.t_end = ev.time;
      w.features = std::move(*m);
      w.label = binary[li];
      w.raw_level = ev.raw_level;
      result.dataset.windows.push_back(std::move(w));
    }
    for (std::int64_t e = length - 1; e <= last_slot; ++e) {
      if (labeled_slots.count(e)) continue;
      auto m = build(e);
      if (!m) {
        ++result.dropped_windows;
        continue;
      }
      SequenceWindow w;
      w.participant_id = stream.participant_id;
      w.t_end = t0 + e * res;
      w.features = std::move(*m);
      result.dataset.windows.push_back(std::move(w));
    }
  }
  for (const auto& [pid, ids] : labels_of) {
    if (!seen_streams.count(pid)) result.unmatched_labels += ids.size();
  }

  std::stable_sort(result.dataset.windows.begin(), result.dataset.windows.end(),
                   [](const SequenceWindow& a, const SequenceWindow& b) {
                     if (a.participant_id != b.participant_id) return a.participant_id < b.participant_id;
                     return a.t_end < b.t_end;
                   });
  result.dataset.reindex();
  return result;
}

}  // namespace sslseq::data
