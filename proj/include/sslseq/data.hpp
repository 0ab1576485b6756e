// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sslseq/common.hpp"

#include <cstdint>
#include <map>
#include <optional>
#include <string>
#include <vector>

namespace sslseq::data {

/// Seconds since the Unix epoch, UTC.
using Timestamp = std::int64_t;

enum class BinaryLabel : int { non_stressed = 0, stressed = 1 };

/// Maps raw self-report levels onto the binary stress label.
struct BinarizationRule {
  enum class Kind { threshold, per_participant_zscore };
  Kind kind = Kind::threshold;
  int threshold = 1;  // level <= threshold is non-stressed

  static BinarizationRule smile() { return {Kind::threshold, 1}; }
  static BinarizationRule crosscheck() { return {Kind::threshold, 0}; }
  static BinarizationRule zscore() { return {Kind::per_participant_zscore, 0}; }
};

std::string to_string(const BinarizationRule& rule);
BinarizationRule parse_binarization_rule(const std::string& text);

/// One participant-window: a T x F feature matrix ending at t_end.
struct SequenceWindow {
  std::string participant_id;
  Timestamp t_end = 0;
  Mat features;  // T x F
  std::optional<BinaryLabel> label;
  std::optional<int> raw_level;

  int steps() const { return static_cast<int>(features.rows()); }
  int feature_count() const { return static_cast<int>(features.cols()); }
  bool labeled() const { return label.has_value(); }
};

struct Dataset {
  std::vector<SequenceWindow> windows;
  std::vector<std::string> feature_names;
  int step_minutes = 5;
  BinarizationRule rule;
  std::vector<std::size_t> labeled_index;
  std::vector<std::size_t> unlabeled_index;

  int steps() const { return windows.empty() ? 0 : windows.front().steps(); }
  int feature_count() const { return static_cast<int>(feature_names.size()); }

  /// Rebuilds labeled/unlabeled index sets from the windows' labels.
  void reindex();
  /// Throws std::invalid_argument naming the first violated invariant.
  void validate() const;
  std::vector<std::string> participants() const;
};

/// Participant-level fold assignment.
struct Split {
  int fold_count = 0;
  std::map<std::string, int> assignments;

  int fold_of(const std::string& participant) const;
  std::vector<std::size_t> train_windows(const Dataset& ds, int fold) const;
  std::vector<std::size_t> validation_windows(const Dataset& ds, int fold) const;
};

struct BinarizeResult {
  std::vector<BinaryLabel> labels;
  std::size_t non_stressed = 0;
  std::size_t stressed = 0;
};

class DegenerateParticipantError : public std::invalid_argument {
 public:
  DegenerateParticipantError(const std::string& participant)
      : std::invalid_argument("participant '" + participant +
                              "' has constant stress levels; z-score binarization is undefined"),
        participant_(participant) {}
  const std::string& participant() const { return participant_; }

 private:
  std::string participant_;
};

BinaryLabel binarize_level(int raw_level, const BinarizationRule& rule);

BinarizeResult binarize(const std::vector<std::pair<std::string, int>>& raw_levels,
                        const BinarizationRule& rule);

Split make_splits(const Dataset& dataset, int fold_count, RngSeed seed);
Split make_splits(const std::vector<std::string>& participants, int fold_count, RngSeed seed);

/// One row of a per-participant feature stream. A row with any NaN value is
/// treated as missing.
struct StreamRow {
  Timestamp time = 0;
  std::vector<double> values;
};

struct ParticipantStream {
  std::string participant_id;
  std::vector<StreamRow> rows;  // strictly increasing time, on a grid of the resolution
};

struct LabelEvent {
  std::string participant_id;
  Timestamp time = 0;
  int raw_level = 0;
};

struct SegmentResult {
  Dataset dataset;
  std::size_t dropped_windows = 0;   // candidate windows rejected for missing steps
  std::size_t unmatched_labels = 0;  // labels whose window was incomplete
};

/// Slides a length-step window (stride one step) over each participant's
/// stream. A label yields one labeled window ending at the label time; every
/// other complete window is unlabeled.
SegmentResult segment(const std::vector<ParticipantStream>& streams,
                      const std::vector<std::string>& feature_names, int length,
                      int resolution_minutes, const std::vector<LabelEvent>& labels,
                      const BinarizationRule& rule);

}  // namespace sslseq::data
