// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sslseq/common.hpp"
#include "sslseq/data.hpp"

#include <map>
#include <optional>
#include <vector>

namespace sslseq::eval {

struct Confusion {
  long tp = 0, fp = 0, tn = 0, fn = 0;

  long total() const { return tp + fp + tn + fn; }
  double precision() const;  // of the stressed class
  double recall() const;
  double f1() const;
  double precision_negative() const;
  double recall_negative() const;
  double f1_negative() const;
  double accuracy() const;
};

Confusion confusion(const std::vector<int>& predicted, const std::vector<int>& labels);
std::vector<int> threshold_predictions(const Vec& probs, double threshold = 0.5);

/// Stressed-class f1; 0 when precision + recall is 0.
double f1_score(const Vec& probs, const std::vector<int>& labels, double threshold = 0.5);
double f1_score(const std::vector<int>& predicted, const std::vector<int>& labels);
double macro_f1(const std::vector<int>& predicted, const std::vector<int>& labels);

struct SublevelStat {
  long count = 0;
  long correct = 0;
  double accuracy() const { return count == 0 ? 0.0 : static_cast<double>(correct) / static_cast<double>(count); }
};

/// Keyed by raw level, ascending.
std::map<int, SublevelStat> sublevel_accuracy(const std::vector<int>& predicted, const std::vector<int>& raw_levels,
                                              const std::vector<int>& labels);
/// Threshold rules only: labels derived from the raw levels.
std::map<int, SublevelStat> sublevel_accuracy(const std::vector<int>& predicted, const std::vector<int>& raw_levels,
                                              const data::BinarizationRule& rule);

struct EvalReport {
  int fold = 0;
  std::uint64_t seed = 0;
  int fold_count = 0;
  Confusion cm;
  double f1 = 0.0;
  double macro_f1 = 0.0;
  std::map<int, SublevelStat> per_sublevel;
};

EvalReport evaluate(const Vec& probs, const std::vector<int>& labels, const std::vector<std::optional<int>>& raw_levels,
                    double threshold = 0.5);

struct MeanStd {
  double mean = 0.0;
  double std = 0.0;  // sample std (ddof = 1)
  long n = 0;
};

MeanStd mean_std(const std::vector<double>& xs);

/// Chance classifier: predictions drawn i.i.d. with the training positive rate.
MeanStd random_baseline(const std::vector<int>& train_labels, const std::vector<int>& test_labels, RngSeed seed,
                        int repetitions = 1000);
/// Ratio-of-expectations approximation 2qP / (qN + P).
double chance_f1_approx(double positive_rate, long positives, long total);

struct PairedTest {
  long n = 0;
  double mean_diff = 0.0;  // mean of a - b
  double t = 0.0;
  double p_two_sided = 1.0;
  double p_greater = 0.5;  // H1: mean(a - b) > 0
  double p_less = 0.5;
  bool exact_tie = false;  // every difference identical; no variance to test
};

PairedTest paired_t_test(const std::vector<double>& a, const std::vector<double>& b);

}  // namespace sslseq::eval
