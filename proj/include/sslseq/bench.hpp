// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sslseq/config.hpp"
#include "sslseq/evaluation.hpp"
#include "sslseq/sweep.hpp"
#include "sslseq/synth.hpp"

#include <map>
#include <ostream>
#include <string>
#include <vector>

namespace sslseq::synth {

struct AblationOptions {
  std::vector<train::Method> methods;
  std::vector<std::uint64_t> seeds;
  std::vector<int> folds;  // empty = every fold of config.folds
  int random_repetitions = 1000;
};

struct AblationRun {
  std::string method;  // method name or "random"
  std::uint64_t seed = 0;
  int fold = 0;
  double f1 = 0.0;
};

struct AblationRow {
  std::string method;
  eval::MeanStd f1;  // over folds x seeds
};

struct AblationResult {
  std::vector<AblationRun> runs;
  std::vector<AblationRow> rows;
  /// Fold-mean f1 per seed, in seed order, keyed by method.
  std::map<std::string, std::vector<double>> per_seed;
  double analytic_chance_f1 = 0.0;
};

/// Each seed draws a fresh dataset (spec.seed = seed) and split; every
/// method trains on identical folds so results pair by seed.
AblationResult run_ablation(const SynthSpec& spec, const config::ExperimentConfig& cfg, const AblationOptions& opt,
                            const eval::Progress& progress = {});

void write_ablation_csv(const AblationResult& r, std::ostream& out);
void write_ablation_runs_csv(const AblationResult& r, std::ostream& out);
void write_ablation_markdown(const AblationResult& r, std::ostream& out);

}  // namespace sslseq::synth
