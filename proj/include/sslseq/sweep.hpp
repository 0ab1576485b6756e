// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sslseq/evaluation.hpp"
#include "sslseq/trainer.hpp"

#include <functional>
#include <ostream>
#include <string>
#include <vector>

namespace sslseq::eval {

/// Supplies the dataset for a seed (a fixed dataset, or a fresh synthetic draw).
using DatasetProvider = std::function<data::Dataset(std::uint64_t seed)>;
using Progress = std::function<void(const std::string&)>;

struct SweepOptions {
  std::vector<double> thresholds;  // ascending NLL thresholds
  std::vector<std::uint64_t> seeds;
  int fold_count = 5;
  std::vector<int> folds;  // folds to run; empty = all
};

struct SweepRun {
  double threshold = 0.0;
  std::string arm;  // active | random
  std::uint64_t seed = 0;
  int fold = 0;
  double f1 = 0.0;
  double frac_labeled = 0.0;
  double frac_unlabeled = 0.0;
  std::size_t pool_size = 0;
  bool fallback = false;  // selection too small; trained without pretraining
};

struct SweepPoint {
  double threshold = 0.0;
  std::string arm;
  MeanStd f1;
  double frac_labeled = 0.0;
  double frac_unlabeled = 0.0;
  long fallbacks = 0;
};

struct SweepComparison {
  double threshold = 0.0;
  PairedTest active_vs_random;  // per-seed fold-mean f1, a = active
};

struct SweepResult {
  std::vector<SweepRun> runs;
  std::vector<SweepPoint> points;
  std::vector<SweepComparison> comparisons;
};

/// For every seed, fold and threshold: pretrain on the actively selected
/// pool and on a random pool of the same size, fine-tune, score validation f1.
SweepResult sweep_active_sampling(const DatasetProvider& datasets, const train::TrainSpec& spec,
                                  const SweepOptions& opt, const Progress& progress = {});

void write_sweep_csv(const SweepResult& r, std::ostream& out);
void write_sweep_runs_csv(const SweepResult& r, std::ostream& out);
/// Rows = thresholds, columns = seeds, cells = fold-mean f1 for one arm.
void write_sweep_matrix_csv(const SweepResult& r, const std::string& arm, std::ostream& out);

}  // namespace sslseq::eval
