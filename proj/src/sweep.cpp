// SPDX-License-Identifier: Apache-2.0
#include "sslseq/sweep.hpp"

#include <algorithm>
#include <cstdio>
#include <map>
#include <stdexcept>

namespace sslseq::eval {

namespace {

std::string fmt(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<int> folds_to_run(const SweepOptions& opt) {
  if (!opt.folds.empty()) return opt.folds;
  std::vector<int> all(static_cast<std::size_t>(opt.fold_count));
  for (int k = 0; k < opt.fold_count; ++k) all[static_cast<std::size_t>(k)] = k;
  return all;
}

}  // namespace

SweepResult sweep_active_sampling(const DatasetProvider& datasets, const train::TrainSpec& base,
                                  const SweepOptions& opt, const Progress& progress) {
  if (opt.thresholds.empty() || opt.seeds.empty()) throw std::invalid_argument("sweep: thresholds and seeds required");
  if (!std::is_sorted(opt.thresholds.begin(), opt.thresholds.end())) {
    throw std::invalid_argument("sweep: thresholds must be sorted ascending");
  }
  train::TrainSpec spec = base;
  if (!train::uses_pretraining(spec.method)) spec.method = train::Method::da_ae;

  SweepResult res;
  for (std::uint64_t seed : opt.seeds) {
    const data::Dataset ds = datasets(seed);
    const auto split = data::make_splits(ds, opt.fold_count, RngSeed{derive_seed(seed, 0x5b1)});
    for (int fold : folds_to_run(opt)) {
      const auto scaler = train::fit_fold_scaler(ds, split, fold, spec.scaler_uses_unlabeled);
      const auto scores = train::score_unlabeled(ds, split, fold, spec, scaler, RngSeed{seed});
      for (std::size_t ti = 0; ti < opt.thresholds.size(); ++ti) {
        const double thr = opt.thresholds[ti];
        const auto report = active::select_by_scores(scores.labeled_nll, scores.unlabeled_nll, thr);
        std::vector<std::size_t> active_pool;
        for (std::size_t k : report.selected) active_pool.push_back(scores.unlabeled[k]);

        std::vector<std::size_t> random_pool = scores.unlabeled;
        Rng rng(derive_seed(seed, 0x7a, ti * 1000 + static_cast<std::uint64_t>(fold)));
        shuffle(random_pool, rng);
        random_pool.resize(active_pool.size());
        std::sort(random_pool.begin(), random_pool.end());

        for (const char* arm : {"active", "random"}) {
          const auto& pool = std::string(arm) == "active" ? active_pool : random_pool;
          const auto out = train::run_fold(ds, split, fold, spec, RngSeed{seed}, &pool);
          SweepRun run;
          run.threshold = thr;
          run.arm = arm;
          run.seed = seed;
          run.fold = fold;
          run.f1 = out.val_f1;
          run.frac_labeled = report.fraction_labeled_below_threshold;
          run.frac_unlabeled = report.fraction_unlabeled_selected;
          run.pool_size = pool.size();
          run.fallback = !out.pretrain.used;
          res.runs.push_back(run);
          if (progress) {
            progress("seed " + std::to_string(seed) + " fold " + std::to_string(fold) + " threshold " + fmt(thr) +
                     " " + arm + " f1=" + fmt(run.f1));
          }
        }
      }
    }
  }

  for (double thr : opt.thresholds) {
    std::map<std::string, std::map<std::uint64_t, std::vector<double>>> per_seed;
    for (const char* arm : {"active", "random"}) {
      SweepPoint pt;
      pt.threshold = thr;
      pt.arm = arm;
      std::vector<double> f1s;
      double fl = 0.0, fu = 0.0;
      for (const auto& r : res.runs) {
        if (r.threshold != thr || r.arm != arm) continue;
        f1s.push_back(r.f1);
        fl += r.frac_labeled;
        fu += r.frac_unlabeled;
        pt.fallbacks += r.fallback;
        per_seed[arm][r.seed].push_back(r.f1);
      }
      pt.f1 = mean_std(f1s);
      if (!f1s.empty()) {
        pt.frac_labeled = fl / static_cast<double>(f1s.size());
        pt.frac_unlabeled = fu / static_cast<double>(f1s.size());
      }
      res.points.push_back(pt);
    }
    if (opt.seeds.size() >= 2) {
      std::vector<double> a, b;
      for (std::uint64_t s : opt.seeds) {
        a.push_back(mean_std(per_seed["active"][s]).mean);
        b.push_back(mean_std(per_seed["random"][s]).mean);
      }
      res.comparisons.push_back({thr, paired_t_test(a, b)});
    }
  }
  return res;
}

void write_sweep_csv(const SweepResult& r, std::ostream& out) {
  out << "threshold,arm,f1_mean,f1_std,frac_labeled,frac_unlabeled\n";
  for (const auto& p : r.points) {
    out << fmt(p.threshold) << ',' << p.arm << ',' << fmt(p.f1.mean) << ',' << fmt(p.f1.std) << ','
        << fmt(p.frac_labeled) << ',' << fmt(p.frac_unlabeled) << '\n';
  }
}

void write_sweep_runs_csv(const SweepResult& r, std::ostream& out) {
  out << "threshold,arm,seed,fold,f1,frac_labeled,frac_unlabeled,pool_size,fallback\n";
  for (const auto& x : r.runs) {
    out << fmt(x.threshold) << ',' << x.arm << ',' << x.seed << ',' << x.fold << ',' << fmt(x.f1) << ','
        << fmt(x.frac_labeled) << ',' << fmt(x.frac_unlabeled) << ',' << x.pool_size << ',' << (x.fallback ? 1 : 0)
        << '\n';
  }
}

void write_sweep_matrix_csv(const SweepResult& r, const std::string& arm, std::ostream& out) {
  std::map<double, std::map<std::uint64_t, std::vector<double>>> cells;
  std::vector<std::uint64_t> seeds;
  for (const auto& x : r.runs) {
    if (x.arm != arm) continue;
    cells[x.threshold][x.seed].push_back(x.f1);
    if (std::find(seeds.begin(), seeds.end(), x.seed) == seeds.end()) seeds.push_back(x.seed);
  }
  out << "threshold";
  for (auto s : seeds) out << ",seed_" << s;
  out << '\n';
  for (const auto& [thr, row] : cells) {
    out << fmt(thr);
    for (auto s : seeds) out << ',' << fmt(mean_std(row.at(s)).mean);
    out << '\n';
  }
}

}  // namespace sslseq::eval
