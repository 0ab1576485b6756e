// SPDX-License-Identifier: Apache-2.0
#include "sslseq/bench.hpp"

#include <cstdio>

namespace sslseq::synth {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::string fmt2(double v) {
  char buf[32];
  std::snprintf(buf, sizeof buf, "%.3f", v);
  return buf;
}

}  // namespace

AblationResult run_ablation(const SynthSpec& spec, const config::ExperimentConfig& cfg, const AblationOptions& opt,
                            const eval::Progress& progress) {
  if (opt.methods.empty() || opt.seeds.empty()) throw std::invalid_argument("run_ablation: methods and seeds required");
  AblationResult res;
  std::vector<int> folds = opt.folds;
  if (folds.empty()) {
    for (int k = 0; k < cfg.folds; ++k) folds.push_back(k);
  }
  std::vector<std::string> names;
  for (auto m : opt.methods) names.push_back(train::to_string(m));
  names.push_back("random");

  double chance_sum = 0.0;
  long chance_n = 0;
  for (std::uint64_t seed : opt.seeds) {
    SynthSpec s = spec;
    s.seed = seed;
    const auto gen = generate(s);
    const auto& ds = gen.dataset;
    const auto split = data::make_splits(ds, cfg.folds, RngSeed{derive_seed(seed, 0x5b1)});
    std::map<std::string, std::vector<double>> fold_f1;
    for (int fold : folds) {
      for (auto m : opt.methods) {
        auto tspec = cfg.resolved(ds.feature_count());
        tspec.method = m;
        const auto out = train::run_fold(ds, split, fold, tspec, RngSeed{seed});
        res.runs.push_back({train::to_string(m), seed, fold, out.val_f1});
        fold_f1[train::to_string(m)].push_back(out.val_f1);
        if (progress) {
          progress("seed " + std::to_string(seed) + " fold " + std::to_string(fold) + " " + train::to_string(m) +
                   " f1=" + fmt2(out.val_f1));
        }
      }
      std::vector<int> train_labels, val_labels;
      for (std::size_t i : split.train_windows(ds, fold)) {
        if (ds.windows[i].labeled()) train_labels.push_back(static_cast<int>(*ds.windows[i].label));
      }
      for (std::size_t i : split.validation_windows(ds, fold)) {
        if (ds.windows[i].labeled()) val_labels.push_back(static_cast<int>(*ds.windows[i].label));
      }
      if (!train_labels.empty() && !val_labels.empty()) {
        const auto rb = eval::random_baseline(train_labels, val_labels, RngSeed{derive_seed(seed, 0xb0, fold)},
                                              opt.random_repetitions);
        res.runs.push_back({"random", seed, fold, rb.mean});
        fold_f1["random"].push_back(rb.mean);
        long pos_train = 0, pos_val = 0;
        for (int y : train_labels) pos_train += y;
        for (int y : val_labels) pos_val += y;
        chance_sum += eval::chance_f1_approx(static_cast<double>(pos_train) / static_cast<double>(train_labels.size()),
                                             pos_val, static_cast<long>(val_labels.size()));
        ++chance_n;
      }
    }
    for (const auto& n : names) res.per_seed[n].push_back(eval::mean_std(fold_f1[n]).mean);
  }
  res.analytic_chance_f1 = chance_n ? chance_sum / static_cast<double>(chance_n) : 0.0;
  for (const auto& n : names) {
    std::vector<double> f1s;
    for (const auto& r : res.runs) {
      if (r.method == n) f1s.push_back(r.f1);
    }
    res.rows.push_back({n, eval::mean_std(f1s)});
  }
  return res;
}

void write_ablation_csv(const AblationResult& r, std::ostream& out) {
  out << "method,f1_mean,f1_std,n\n";
  for (const auto& row : r.rows) {
    out << row.method << ',' << fmt(row.f1.mean) << ',' << fmt(row.f1.std) << ',' << row.f1.n << '\n';
  }
}

void write_ablation_runs_csv(const AblationResult& r, std::ostream& out) {
  out << "method,seed,fold,f1\n";
  for (const auto& x : r.runs) out << x.method << ',' << x.seed << ',' << x.fold << ',' << fmt(x.f1) << '\n';
}

void write_ablation_markdown(const AblationResult& r, std::ostream& out) {
  out << "| Method | f1 (mean ± std) | runs |\n|---|---|---|\n";
  const eval::MeanStd* base = nullptr;
  for (const auto& row : r.rows) {
    if (row.method == "baseline") base = &row.f1;
  }
  for (const auto& row : r.rows) {
    out << "| " << row.method << " | " << fmt2(row.f1.mean) << " ± " << fmt2(row.f1.std) << " | " << row.f1.n
        << " |\n";
  }
  out << "\nAnalytic chance f1 (independent Bernoulli approximation): " << fmt2(r.analytic_chance_f1) << "\n";
  if (base && base->mean > 0) {
    out << "\nRelative change over baseline:\n\n";
    for (const auto& row : r.rows) {
      if (row.method == "baseline" || row.method == "random") continue;
      out << "- " << row.method << ": " << fmt2(100.0 * (row.f1.mean - base->mean) / base->mean) << "%\n";
    }
  }
  if (r.per_seed.count("baseline")) {
    out << "\nPaired one-sided t-tests against baseline (per-seed fold means):\n\n";
    for (const auto& [name, xs] : r.per_seed) {
      if (name == "baseline" || name == "random" || xs.size() < 2) continue;
      const auto t = eval::paired_t_test(xs, r.per_seed.at("baseline"));
      out << "- " << name << " > baseline: t = " << fmt2(t.t) << ", p = " << fmt2(t.p_greater) << "\n";
    }
  }
}

}  // namespace sslseq::synth
