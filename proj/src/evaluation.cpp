// SPDX-License-Identifier: Apache-2.0
#include "sslseq/evaluation.hpp"

#include <boost/math/distributions/students_t.hpp>

#include <cmath>
#include <limits>
#include <stdexcept>

namespace sslseq::eval {

namespace {

double ratio(long num, long den) { return den == 0 ? 0.0 : static_cast<double>(num) / static_cast<double>(den); }

double harmonic(double p, double r) { return p + r > 0 ? 2.0 * p * r / (p + r) : 0.0; }

void check_sizes(std::size_t a, std::size_t b, const char* what) {
  if (a != b) throw DimensionError(std::string(what) + ": length mismatch");
}

}  // namespace

double Confusion::precision() const { return ratio(tp, tp + fp); }
double Confusion::recall() const { return ratio(tp, tp + fn); }
double Confusion::f1() const { return harmonic(precision(), recall()); }
double Confusion::precision_negative() const { return ratio(tn, tn + fn); }
double Confusion::recall_negative() const { return ratio(tn, tn + fp); }
double Confusion::f1_negative() const { return harmonic(precision_negative(), recall_negative()); }
double Confusion::accuracy() const { return ratio(tp + tn, total()); }

Confusion confusion(const std::vector<int>& predicted, const std::vector<int>& labels) {
  check_sizes(predicted.size(), labels.size(), "confusion");
  Confusion c;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const bool p = predicted[i] != 0;
    const bool y = labels[i] != 0;
    if (p && y) ++c.tp;
    else if (p) ++c.fp;
    else if (y) ++c.fn;
    else ++c.tn;
  }
  return c;
}

std::vector<int> threshold_predictions(const Vec& probs, double threshold) {
  std::vector<int> out(static_cast<std::size_t>(probs.size()));
  for (Eigen::Index i = 0; i < probs.size(); ++i) out[static_cast<std::size_t>(i)] = probs(i) >= threshold ? 1 : 0;
  return out;
}

double f1_score(const std::vector<int>& predicted, const std::vector<int>& labels) {
  if (labels.empty()) throw std::invalid_argument("f1_score: empty input");
  return confusion(predicted, labels).f1();
}

double f1_score(const Vec& probs, const std::vector<int>& labels, double threshold) {
  return f1_score(threshold_predictions(probs, threshold), labels);
}

double macro_f1(const std::vector<int>& predicted, const std::vector<int>& labels) {
  const Confusion c = confusion(predicted, labels);
  return 0.5 * (c.f1() + c.f1_negative());
}

std::map<int, SublevelStat> sublevel_accuracy(const std::vector<int>& predicted, const std::vector<int>& raw_levels,
                                              const std::vector<int>& labels) {
  check_sizes(predicted.size(), raw_levels.size(), "sublevel_accuracy");
  check_sizes(predicted.size(), labels.size(), "sublevel_accuracy");
  std::map<int, SublevelStat> out;
  for (std::size_t i = 0; i < predicted.size(); ++i) {
    auto& s = out[raw_levels[i]];
    ++s.count;
    if ((predicted[i] != 0) == (labels[i] != 0)) ++s.correct;
  }
  return out;
}

std::map<int, SublevelStat> sublevel_accuracy(const std::vector<int>& predicted, const std::vector<int>& raw_levels,
                                              const data::BinarizationRule& rule) {
  if (rule.kind != data::BinarizationRule::Kind::threshold) {
    throw std::invalid_argument("sublevel_accuracy: z-score rules need explicit labels");
  }
  std::vector<int> labels;
  labels.reserve(raw_levels.size());
  for (int lvl : raw_levels) labels.push_back(static_cast<int>(data::binarize_level(lvl, rule)));
  return sublevel_accuracy(predicted, raw_levels, labels);
}

EvalReport evaluate(const Vec& probs, const std::vector<int>& labels, const std::vector<std::optional<int>>& raw_levels,
                    double threshold) {
  EvalReport r;
  const auto pred = threshold_predictions(probs, threshold);
  r.cm = confusion(pred, labels);
  r.f1 = r.cm.f1();
  r.macro_f1 = 0.5 * (r.cm.f1() + r.cm.f1_negative());
  if (!raw_levels.empty()) {
    check_sizes(raw_levels.size(), labels.size(), "evaluate");
    std::vector<int> p, lv, y;
    for (std::size_t i = 0; i < labels.size(); ++i) {
      if (!raw_levels[i]) continue;
      p.push_back(pred[i]);
      lv.push_back(*raw_levels[i]);
      y.push_back(labels[i]);
    }
    r.per_sublevel = sublevel_accuracy(p, lv, y);
  }
  return r;
}

MeanStd mean_std(const std::vector<double>& xs) {
  MeanStd m;
  m.n = static_cast<long>(xs.size());
  if (xs.empty()) return m;
  double s = 0.0;
  for (double x : xs) s += x;
  m.mean = s / static_cast<double>(xs.size());
  if (xs.size() > 1) {
    double ss = 0.0;
    for (double x : xs) ss += (x - m.mean) * (x - m.mean);
    m.std = std::sqrt(ss / static_cast<double>(xs.size() - 1));
  }
  return m;
}

MeanStd random_baseline(const std::vector<int>& train_labels, const std::vector<int>& test_labels, RngSeed seed,
                        int repetitions) {
  if (train_labels.empty() || test_labels.empty()) throw std::invalid_argument("random_baseline: empty labels");
  if (repetitions < 100) throw std::invalid_argument("random_baseline: repetitions must be >= 100");
  long pos = 0;
  for (int y : train_labels) pos += y != 0;
  const double q = static_cast<double>(pos) / static_cast<double>(train_labels.size());
  Rng rng(derive_seed(seed.value, 0xba5e));
  std::vector<double> scores;
  scores.reserve(static_cast<std::size_t>(repetitions));
  std::vector<int> pred(test_labels.size());
  for (int r = 0; r < repetitions; ++r) {
    for (auto& p : pred) p = rng.bernoulli(q) ? 1 : 0;
    scores.push_back(f1_score(pred, test_labels));
  }
  return mean_std(scores);
}

double chance_f1_approx(double positive_rate, long positives, long total) {
  const double den = positive_rate * static_cast<double>(total) + static_cast<double>(positives);
  return den > 0 ? 2.0 * positive_rate * static_cast<double>(positives) / den : 0.0;
}

PairedTest paired_t_test(const std::vector<double>& a, const std::vector<double>& b) {
  check_sizes(a.size(), b.size(), "paired_t_test");
  if (a.size() < 2) throw std::invalid_argument("paired_t_test: need n >= 2 pairs");
  PairedTest r;
  r.n = static_cast<long>(a.size());
  std::vector<double> d(a.size());
  for (std::size_t i = 0; i < a.size(); ++i) d[i] = a[i] - b[i];
  const MeanStd ms = mean_std(d);
  r.mean_diff = ms.mean;
  bool all_equal = true;
  for (double x : d) all_equal = all_equal && x == d.front();
  if (all_equal) {
    r.exact_tie = true;
    if (d.front() == 0.0) {
      r.t = 0.0;
      r.p_two_sided = 1.0;
      r.p_greater = 1.0;
      r.p_less = 1.0;
    } else {
      r.t = std::copysign(std::numeric_limits<double>::infinity(), d.front());
      r.p_two_sided = 0.0;
      r.p_greater = d.front() > 0 ? 0.0 : 1.0;
      r.p_less = d.front() < 0 ? 0.0 : 1.0;
    }
    return r;
  }
  r.t = ms.mean / (ms.std / std::sqrt(static_cast<double>(r.n)));
  boost::math::students_t dist(static_cast<double>(r.n - 1));
  r.p_greater = boost::math::cdf(boost::math::complement(dist, r.t));
  r.p_less = boost::math::cdf(dist, r.t);
  r.p_two_sided = std::min(1.0, 2.0 * std::min(r.p_greater, r.p_less));
  return r;
}

}  // namespace sslseq::eval
