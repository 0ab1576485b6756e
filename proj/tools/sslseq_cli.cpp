// SPDX-License-Identifier: Apache-2.0
#include "sslseq/active.hpp"
#include "sslseq/augment.hpp"
#include "sslseq/autoencoder.hpp"
#include "sslseq/bench.hpp"
#include "sslseq/checkpoint.hpp"
#include "sslseq/config.hpp"
#include "sslseq/data_io.hpp"
#include "sslseq/evaluation.hpp"
#include "sslseq/features_io.hpp"
#include "sslseq/saliency.hpp"
#include "sslseq/sweep.hpp"
#include "sslseq/synth.hpp"
#include "sslseq/trainer.hpp"

#include <CLI11.hpp>

#include <cstdio>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <sstream>

namespace fs = std::filesystem;
using namespace sslseq;

namespace {

std::string num(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::ofstream open_out(const fs::path& path) {
  if (path.has_parent_path()) fs::create_directories(path.parent_path());
  std::ofstream out(path, std::ios::binary);
  if (!out) throw std::runtime_error("cannot write " + path.string());
  return out;
}

std::vector<std::uint64_t> parse_seeds(const std::string& text) {
  std::vector<std::uint64_t> out;
  const auto dots = text.find("..");
  if (dots != std::string::npos) {
    const auto lo = std::stoull(text.substr(0, dots));
    const auto hi = std::stoull(text.substr(dots + 2));
    if (hi < lo) throw std::invalid_argument("seed range must be ascending");
    for (auto s = lo; s <= hi; ++s) out.push_back(s);
    return out;
  }
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stoull(item));
  }
  if (out.empty()) throw std::invalid_argument("no seeds given");
  return out;
}

std::vector<double> parse_doubles(const std::string& text) {
  std::vector<double> out;
  std::stringstream ss(text);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.push_back(std::stod(item));
  }
  return out;
}

std::vector<int> parse_ints(const std::string& text) {
  std::vector<int> out;
  for (double d : parse_doubles(text)) out.push_back(static_cast<int>(d));
  return out;
}

std::pair<int, int> parse_range(const std::string& text) {
  const auto colon = text.find(':');
  if (colon == std::string::npos) throw std::invalid_argument("range must look like lo:hi");
  return {std::stoi(text.substr(0, colon)), std::stoi(text.substr(colon + 1))};
}

void write_matrix_rows(std::ostream& out, const Mat& m) {
  for (Eigen::Index r = 0; r < m.rows(); ++r) {
    for (Eigen::Index c = 0; c < m.cols(); ++c) out << (c ? "," : "") << num(m(r, c));
    out << '\n';
  }
}

// ---------------------------------------------------------------- latents ----

void write_latents(const fs::path& path, const std::vector<std::size_t>& ids, const Mat& z) {
  auto out = open_out(path);
  out << "window_id";
  for (Eigen::Index c = 0; c < z.cols(); ++c) out << ",h" << c;
  out << '\n';
  for (std::size_t i = 0; i < ids.size(); ++i) {
    out << ids[i];
    for (Eigen::Index c = 0; c < z.cols(); ++c) out << ',' << num(z(static_cast<Eigen::Index>(i), c));
    out << '\n';
  }
}

std::pair<std::vector<std::string>, Mat> read_latents(const fs::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  std::string line;
  std::getline(in, line);
  const auto header = data::split_csv_line(line);
  if (header.size() < 2 || header[0] != "window_id") throw std::runtime_error(path.string() + ": bad latent header");
  std::vector<std::string> ids;
  std::vector<std::vector<double>> rows;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    auto cells = data::split_csv_line(line);
    if (cells.size() != header.size()) throw std::runtime_error(path.string() + ": ragged row");
    ids.push_back(cells[0]);
    std::vector<double> r;
    for (std::size_t c = 1; c < cells.size(); ++c) r.push_back(std::stod(cells[c]));
    rows.push_back(std::move(r));
  }
  Mat z(static_cast<Eigen::Index>(rows.size()), static_cast<Eigen::Index>(header.size() - 1));
  for (std::size_t i = 0; i < rows.size(); ++i) {
    for (std::size_t c = 0; c < rows[i].size(); ++c) z(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(c)) = rows[i][c];
  }
  return {ids, z};
}

// ------------------------------------------------------------ subcommands ----

struct FeaturesArgs {
  std::string rr, sc, phone, app_map, out;
  int resolution = 5;
};

int run_features(const FeaturesArgs& a) {
  features::ExtractOptions opt;
  opt.resolution_minutes = a.resolution;
  if (!a.app_map.empty()) opt.app_map = features::read_app_map(a.app_map);
  std::map<std::string, std::vector<features::TimedValue>> rr;
  features::ScFile sc;
  std::map<std::string, features::PhoneEventLog> phone;
  if (!a.rr.empty()) rr = features::read_rr_csv(a.rr);
  if (!a.sc.empty()) sc = features::read_sc_csv(a.sc);
  if (!a.phone.empty()) phone = features::read_phone_csv(a.phone);
  const auto stream = features::extract_stream(a.rr.empty() ? nullptr : &rr, a.sc.empty() ? nullptr : &sc,
                                               a.phone.empty() ? nullptr : &phone, opt);
  auto out = open_out(a.out);
  data::write_stream_csv(out, stream);
  return 0;
}

struct SegmentArgs {
  std::string stream, labels, out, rule = "smile";
  int length = 30, resolution = 5;
};

int run_segment(const SegmentArgs& a) {
  const auto stream = data::read_stream_csv(fs::path(a.stream));
  std::vector<data::LabelEvent> labels;
  if (!a.labels.empty()) labels = data::read_label_csv(fs::path(a.labels));
  const auto res = data::segment(stream.streams, stream.feature_names, a.length, a.resolution, labels,
                                 data::parse_binarization_rule(a.rule));
  data::save_dataset(res.dataset, a.out);
  std::cout << "windows " << res.dataset.windows.size() << " labeled " << res.dataset.labeled_index.size()
            << " dropped " << res.dropped_windows << " unmatched_labels " << res.unmatched_labels << '\n';
  return 0;
}

struct SynthArgs {
  std::string spec, out;
  long long seed = -1;
};

synth::SynthSpec load_synth_spec(const std::string& path) {
  return path.empty() ? synth::SynthSpec{} : synth::synth_spec_from_json(config::read_json_file(path));
}

int run_synth(const SynthArgs& a) {
  auto spec = load_synth_spec(a.spec);
  if (a.seed >= 0) spec.seed = static_cast<std::uint64_t>(a.seed);
  const auto g = synth::generate(spec);
  data::save_dataset(g.dataset, a.out);
  auto truth = open_out(fs::path(a.out) / "truth.csv");
  truth << "window_id,stressed,contaminant\n";
  for (std::size_t i = 0; i < g.stressed.size(); ++i) {
    truth << i << ',' << (g.stressed[i] ? 1 : 0) << ',' << (g.contaminant[i] ? 1 : 0) << '\n';
  }
  auto meta = open_out(fs::path(a.out) / "synth_spec.json");
  nlohmann::json j = synth::to_json(spec);
  j["signature_columns"] = g.signature;
  meta << j.dump(2) << '\n';
  std::cout << "windows " << g.dataset.windows.size() << " labeled " << g.dataset.labeled_index.size() << '\n';
  return 0;
}

struct AugmentArgs {
  std::string dataset, config, out;
  int copies = 0;
  std::uint64_t seed = 0;
  std::size_t window = 0;
  long limit = -1;
};

int run_augment(const AugmentArgs& a) {
  const auto ds = data::load_dataset(a.dataset);
  augment::AugmentationSpec spec;
  if (!a.config.empty()) spec = config::load_config(a.config).train.augmentation;
  if (a.copies > 0) spec.copies = a.copies;
  // Raw units: jitter scales with each feature's spread.
  std::vector<const Mat*> all;
  for (const auto& w : ds.windows) all.push_back(&w.features);
  const auto scaler = train::Scaler::fit(all);
  spec.feature_std.assign(scaler.std.data(), scaler.std.data() + scaler.std.size());
  spec.validate();

  const std::size_t n = a.limit < 0 ? ds.windows.size() : std::min<std::size_t>(ds.windows.size(), a.limit);
  std::vector<data::SequenceWindow> src(ds.windows.begin(), ds.windows.begin() + static_cast<std::ptrdiff_t>(n));
  const auto copies = augment::augment_batch(src, spec, RngSeed{a.seed});
  data::Dataset out = ds;
  out.windows.clear();
  for (const auto& per : copies) {
    for (const auto& w : per) out.windows.push_back(w);
  }
  out.reindex();
  data::save_dataset(out, fs::path(a.out) / "augmented");

  if (a.window >= ds.windows.size()) throw std::invalid_argument("--window out of range");
  const Mat& x = ds.windows[a.window].features;
  auto csv = open_out(fs::path(a.out) / "operators.csv");
  csv << "op,step,feature,before,after\n";
  for (auto op : {augment::Op::jitter, augment::Op::scale, augment::Op::time_warp, augment::Op::magnitude_warp}) {
    augment::AugmentationSpec single = spec;
    single.ops = {op};
    const Mat y = augment::apply(x, single, RngSeed{derive_seed(a.seed, 0xf16, static_cast<std::uint64_t>(op))});
    for (Eigen::Index t = 0; t < x.rows(); ++t) {
      for (Eigen::Index f = 0; f < x.cols(); ++f) {
        csv << augment::to_string(op) << ',' << t << ',' << ds.feature_names[static_cast<std::size_t>(f)] << ','
            << num(x(t, f)) << ',' << num(y(t, f)) << '\n';
      }
    }
  }
  return 0;
}

struct SplitArgs {
  int fold = -1;
  int folds = 0;
  long long split_seed = -1;
};

data::Split split_for(const data::Dataset& ds, const config::ExperimentConfig& cfg, const SplitArgs& s) {
  const int folds = s.folds > 0 ? s.folds : cfg.folds;
  const std::uint64_t seed = s.split_seed >= 0 ? static_cast<std::uint64_t>(s.split_seed) : cfg.split_seed;
  return data::make_splits(ds, folds, RngSeed{seed});
}

struct PretrainArgs {
  std::string dataset, spec, out, loss_curve, labeled_latents, unlabeled_latents;
  SplitArgs split;
  std::uint64_t seed = 0;
  bool labeled_only = false;
  bool reverse_decode = false;
};

int run_pretrain(const PretrainArgs& a) {
  const auto cfg = config::load_config(a.spec);
  const auto ds = data::load_dataset(a.dataset.empty() ? cfg.dataset : a.dataset);
  auto tspec = cfg.resolved(ds.feature_count());
  if (a.reverse_decode) tspec.pretrain.reverse_decode = true;

  std::vector<std::size_t> pool_idx;
  std::vector<const Mat*> scaler_src;
  std::vector<std::size_t> lab_ids, unl_ids;
  std::optional<data::Split> split;
  if (a.split.fold >= 0) split = split_for(ds, cfg, a.split);
  for (std::size_t i = 0; i < ds.windows.size(); ++i) {
    const auto& w = ds.windows[i];
    if (split && split->fold_of(w.participant_id) == a.split.fold) continue;
    if (w.labeled() || tspec.scaler_uses_unlabeled) scaler_src.push_back(&w.features);
    (w.labeled() ? lab_ids : unl_ids).push_back(i);
  }
  const auto scaler = train::Scaler::fit(scaler_src);
  const auto& pool = a.labeled_only ? lab_ids : unl_ids;
  std::vector<Mat> windows;
  for (std::size_t i : pool) windows.push_back(scaler.transform(ds.windows[i].features));
  auto res = ae::pretrain(windows, tspec.network, tspec.pretrain, RngSeed{a.seed});

  nlohmann::json extra = {{"scaler", train::to_json(scaler)}, {"pool_size", pool.size()}};
  nn::write_checkpoint(nn::to_checkpoint(res.model, a.seed, static_cast<long>(res.curve.size()), extra), a.out);
  if (!a.loss_curve.empty()) {
    auto out = open_out(a.loss_curve);
    out << "epoch,train_mse,holdout_mse\n";
    for (const auto& p : res.curve) out << p.epoch << ',' << num(p.train_mse) << ',' << num(p.holdout_mse) << '\n';
  }
  auto emit = [&](const std::string& path, const std::vector<std::size_t>& ids) {
    if (path.empty()) return;
    std::vector<Mat> ws;
    for (std::size_t i : ids) ws.push_back(scaler.transform(ds.windows[i].features));
    write_latents(path, ids, ws.empty() ? Mat(0, tspec.network.latent_dim()) : ae::latents(res.model, ws));
  };
  emit(a.labeled_latents, lab_ids);
  emit(a.unlabeled_latents, unl_ids);
  return 0;
}

struct SelectArgs {
  std::string labeled, unlabeled, report, k_range = "1:10", gmm_space = "latent";
  double threshold = 0.0;
  std::uint64_t seed = 0;
};

int run_select(const SelectArgs& a) {
  auto [lab_ids, zl] = read_latents(a.labeled);
  auto [unl_ids, zu] = read_latents(a.unlabeled);
  const auto space = active::GmmSpace::parse(a.gmm_space);
  if (space.pca_dims > 0) {
    const auto p = active::pca_project(zl, space.pca_dims);
    zl = p.points;
    if (zu.rows() > 0) zu = active::pca_apply(p, zu);
  }
  const auto [lo, hi] = parse_range(a.k_range);
  const auto sel = active::select_k(zl, lo, hi, RngSeed{derive_seed(a.seed, 0x6e)});
  const auto model = active::fit_gmm(zl, sel.k, RngSeed{derive_seed(a.seed, 0x6f)});
  const auto report = active::select_unlabeled(model, zl, zu, a.threshold);

  auto out = open_out(a.report);
  out << "row,k,params,log_likelihood,aic,bic,threshold,frac_unlabeled_selected,frac_labeled_below,window_id,nll\n";
  for (const auto& r : sel.table) {
    out << "ic," << r.k << ',' << r.params << ',' << num(r.log_likelihood) << ',' << num(r.aic) << ',' << num(r.bic)
        << ",,,,,\n";
  }
  out << "selection," << sel.k << ",,,,," << num(report.threshold) << ',' << num(report.fraction_unlabeled_selected)
      << ',' << num(report.fraction_labeled_below_threshold) << ",,\n";
  for (std::size_t k : report.selected) {
    out << "selected,,,,,,,,," << unl_ids[k] << ',' << num(report.unlabeled_nll(static_cast<Eigen::Index>(k)))
        << '\n';
  }
  std::cout << "K=" << sel.k << " selected " << report.selected.size() << "/" << unl_ids.size() << '\n';
  return 0;
}

struct TrainArgs {
  std::string config, dataset, out;
  int fold = 0;
  std::uint64_t seed = 0;
};

int run_train(const TrainArgs& a) {
  const auto cfg = config::load_config(a.config);
  const auto ds = data::load_dataset(a.dataset.empty() ? cfg.dataset : a.dataset);
  const auto tspec = cfg.resolved(ds.feature_count());
  const auto split = data::make_splits(ds, cfg.folds, RngSeed{cfg.split_seed});
  if (a.fold < 0 || a.fold >= cfg.folds) throw std::invalid_argument("--fold out of range");
  const auto res = train::run_fold(ds, split, a.fold, tspec, RngSeed{a.seed});
  if (!res.audit.clean()) throw std::runtime_error("leakage audit failed");

  const fs::path dir = a.out;
  fs::create_directories(dir);
  auto log = open_out(dir / "log.csv");
  log << "epoch,loss_ce,loss_kl_l,loss_kl_u,val_f1\n";
  for (const auto& r : res.train.log) {
    log << r.epoch << ',' << num(r.loss_ce) << ',' << num(r.loss_kl_l) << ',' << num(r.loss_kl_u) << ','
        << num(r.val_f1) << '\n';
  }
  auto ckpt = train::to_checkpoint(res.train, a.seed, tspec);
  ckpt.header["extra"]["fold"] = a.fold;
  ckpt.header["extra"]["fold_count"] = cfg.folds;
  ckpt.header["extra"]["split_seed"] = cfg.split_seed;
  nn::write_checkpoint(ckpt, dir / "model.ckpt");
  open_out(dir / "scaler.json") << train::to_json(res.train.scaler).dump(2) << '\n';
  if (res.pretrain.used) {
    auto curve = open_out(dir / "pretrain_curve.csv");
    curve << "epoch,train_mse,holdout_mse\n";
    for (const auto& p : res.pretrain.curve) {
      curve << p.epoch << ',' << num(p.train_mse) << ',' << num(p.holdout_mse) << '\n';
    }
  }
  std::cout << "best epoch " << res.train.best_epoch << " val f1 " << num(res.val_f1) << '\n';
  return 0;
}

struct EvaluateArgs {
  std::string checkpoint, dataset, report;
  SplitArgs split;
};

int run_evaluate(const EvaluateArgs& a) {
  const auto ckpt = nn::read_checkpoint(fs::path(a.checkpoint));
  const auto ds = data::load_dataset(a.dataset);
  const auto& extra = ckpt.header.at("extra");
  const int fold = a.split.fold >= 0 ? a.split.fold : extra.value("fold", 0);
  const int folds = a.split.folds > 0 ? a.split.folds : extra.value("fold_count", 5);
  const std::uint64_t split_seed =
      a.split.split_seed >= 0 ? static_cast<std::uint64_t>(a.split.split_seed) : extra.value("split_seed", 0ULL);
  const auto split = data::make_splits(ds, folds, RngSeed{split_seed});

  std::vector<const Mat*> ws;
  std::vector<int> labels, train_labels;
  std::vector<std::optional<int>> levels;
  for (std::size_t i : split.validation_windows(ds, fold)) {
    const auto& w = ds.windows[i];
    if (!w.labeled()) continue;
    ws.push_back(&w.features);
    labels.push_back(static_cast<int>(*w.label));
    levels.push_back(w.raw_level);
  }
  for (std::size_t i : split.train_windows(ds, fold)) {
    if (ds.windows[i].labeled()) train_labels.push_back(static_cast<int>(*ds.windows[i].label));
  }
  if (ws.empty()) throw std::runtime_error("evaluate: validation fold has no labeled windows");
  const Vec probs = train::predict(ckpt, ws);
  auto rep = eval::evaluate(probs, labels, levels);
  const std::uint64_t seed = ckpt.header.value("seed", 0ULL);
  const auto rb = eval::random_baseline(train_labels.empty() ? labels : train_labels, labels, RngSeed{seed}, 1000);

  auto out = open_out(a.report);
  out << "metric,value\n";
  out << "fold," << fold << "\nfold_count," << folds << "\nseed," << seed << "\nwindows," << rep.cm.total() << '\n';
  out << "f1," << num(rep.f1) << "\nmacro_f1," << num(rep.macro_f1) << '\n';
  out << "precision_stressed," << num(rep.cm.precision()) << "\nrecall_stressed," << num(rep.cm.recall()) << '\n';
  out << "precision_non_stressed," << num(rep.cm.precision_negative()) << "\nrecall_non_stressed,"
      << num(rep.cm.recall_negative()) << '\n';
  out << "tp," << rep.cm.tp << "\nfp," << rep.cm.fp << "\ntn," << rep.cm.tn << "\nfn," << rep.cm.fn << '\n';
  out << "random_baseline_f1_mean," << num(rb.mean) << "\nrandom_baseline_f1_std," << num(rb.std) << '\n';
  for (const auto& [lvl, s] : rep.per_sublevel) {
    out << "sublevel_" << lvl << "_count," << s.count << "\nsublevel_" << lvl << "_accuracy," << num(s.accuracy())
        << '\n';
  }
  std::cout << "f1 " << num(rep.f1) << '\n';
  return 0;
}

struct SweepArgs {
  std::string config, thresholds, seeds = "0", out, synth, folds_run;
};

int run_sweep(const SweepArgs& a) {
  const auto cfg = config::load_config(a.config);
  eval::SweepOptions opt;
  opt.thresholds = a.thresholds.empty() ? cfg.thresholds : parse_doubles(a.thresholds);
  opt.seeds = parse_seeds(a.seeds);
  opt.fold_count = cfg.folds;
  if (!a.folds_run.empty()) opt.folds = parse_ints(a.folds_run);
  eval::DatasetProvider provider;
  int features = 0;
  if (!a.synth.empty()) {
    const auto base = load_synth_spec(a.synth);
    features = base.features;
    provider = [base](std::uint64_t seed) {
      auto s = base;
      s.seed = seed;
      return synth::generate(s).dataset;
    };
  } else {
    const auto ds = data::load_dataset(cfg.dataset);
    features = ds.feature_count();
    provider = [ds](std::uint64_t) { return ds; };
  }
  const auto res = eval::sweep_active_sampling(provider, cfg.resolved(features), opt,
                                               [](const std::string& m) { std::cerr << m << '\n'; });
  const fs::path dir = a.out;
  fs::create_directories(dir);
  auto s = open_out(dir / "sweep.csv");
  eval::write_sweep_csv(res, s);
  auto r = open_out(dir / "runs.csv");
  eval::write_sweep_runs_csv(res, r);
  auto ma = open_out(dir / "matrix_active.csv");
  eval::write_sweep_matrix_csv(res, "active", ma);
  auto mr = open_out(dir / "matrix_random.csv");
  eval::write_sweep_matrix_csv(res, "random", mr);
  auto t = open_out(dir / "tests.csv");
  t << "threshold,n,mean_diff,t,p_two_sided,p_active_greater,exact_tie\n";
  for (const auto& c : res.comparisons) {
    const auto& p = c.active_vs_random;
    t << num(c.threshold) << ',' << p.n << ',' << num(p.mean_diff) << ',' << num(p.t) << ',' << num(p.p_two_sided)
      << ',' << num(p.p_greater) << ',' << (p.exact_tie ? 1 : 0) << '\n';
  }
  return 0;
}

struct SaliencyArgs {
  std::string checkpoint, dataset, out, heatmap;
  SplitArgs split;
  bool correct_only = false;
  double threshold = 0.5;
};

int run_saliency(const SaliencyArgs& a) {
  const auto ckpt = nn::read_checkpoint(fs::path(a.checkpoint));
  const auto ds = data::load_dataset(a.dataset);
  const auto net = nn::classifier_from_checkpoint(ckpt);
  const auto scaler = train::scaler_from_json(ckpt.header.at("extra").at("scaler"));
  std::optional<data::Split> split;
  if (a.split.fold >= 0) {
    const auto& extra = ckpt.header.at("extra");
    const int folds = a.split.folds > 0 ? a.split.folds : extra.value("fold_count", 5);
    const std::uint64_t ss =
        a.split.split_seed >= 0 ? static_cast<std::uint64_t>(a.split.split_seed) : extra.value("split_seed", 0ULL);
    split = data::make_splits(ds, folds, RngSeed{ss});
  }
  std::vector<Mat> zs;
  std::vector<int> labels;
  for (const auto& w : ds.windows) {
    if (!w.labeled()) continue;
    if (split && split->fold_of(w.participant_id) != a.split.fold) continue;
    zs.push_back(scaler.transform(w.features));
    labels.push_back(static_cast<int>(*w.label));
  }
  std::vector<const Mat*> ptrs;
  for (const auto& z : zs) ptrs.push_back(&z);
  if (a.correct_only) {
    const Vec p = train::predict_standardized(net, ptrs);
    std::vector<const Mat*> keep;
    for (std::size_t i = 0; i < ptrs.size(); ++i) {
      if ((p(static_cast<Eigen::Index>(i)) >= 0.5) == (labels[i] != 0)) keep.push_back(ptrs[i]);
    }
    ptrs = keep;
  }
  if (ptrs.empty()) throw std::runtime_error("saliency: no windows to attribute");
  const auto map = saliency::average_saliency(net, ptrs, ds.feature_names, ds.step_minutes);
  auto out = open_out(a.out);
  out << "step";
  for (const auto& n : ds.feature_names) out << ',' << n;
  out << '\n';
  for (Eigen::Index t = 0; t < map.values.rows(); ++t) {
    out << t;
    for (Eigen::Index f = 0; f < map.values.cols(); ++f) out << ',' << num(map.values(t, f));
    out << '\n';
  }
  out << "horizon_minutes," << num(saliency::effective_horizon(map, a.threshold)) << '\n';
  if (!a.heatmap.empty()) {
    auto h = open_out(a.heatmap);
    h << "step,minutes_before_label,feature,saliency\n";
    const auto T = map.values.rows();
    for (Eigen::Index t = 0; t < T; ++t) {
      for (Eigen::Index f = 0; f < map.values.cols(); ++f) {
        h << t << ',' << (T - t) * map.step_minutes << ',' << ds.feature_names[static_cast<std::size_t>(f)] << ','
          << num(map.values(t, f)) << '\n';
      }
    }
  }
  std::cout << "windows " << map.sample_count << " horizon_minutes " << num(saliency::effective_horizon(map, a.threshold))
            << (map.degenerate ? " (degenerate map)" : "") << '\n';
  return 0;
}

struct BenchArgs {
  std::string spec, config, methods = "all", seeds = "0..9", out, markdown, runs, folds_run;
};

int run_bench(const BenchArgs& a) {
  const auto spec = load_synth_spec(a.spec);
  const auto cfg = a.config.empty() ? config::ExperimentConfig{} : config::load_config(a.config);
  synth::AblationOptions opt;
  if (a.methods == "all") {
    opt.methods = train::all_methods();
  } else {
    std::stringstream ss(a.methods);
    std::string m;
    while (std::getline(ss, m, ',')) opt.methods.push_back(train::parse_method(m));
  }
  opt.seeds = parse_seeds(a.seeds);
  if (!a.folds_run.empty()) opt.folds = parse_ints(a.folds_run);
  const auto res = synth::run_ablation(spec, cfg, opt, [](const std::string& m) { std::cerr << m << '\n'; });
  auto out = open_out(a.out);
  synth::write_ablation_csv(res, out);
  const fs::path md = a.markdown.empty() ? fs::path(a.out).replace_extension(".md") : fs::path(a.markdown);
  auto mdo = open_out(md);
  synth::write_ablation_markdown(res, mdo);
  if (!a.runs.empty()) {
    auto r = open_out(a.runs);
    synth::write_ablation_runs_csv(res, r);
  }
  return 0;
}

void add_split_flags(CLI::App* cmd, SplitArgs& s, bool fold_flag = true) {
  if (fold_flag) cmd->add_option("--fold", s.fold, "Fold index (validation fold)");
  cmd->add_option("--folds", s.folds, "Fold count (default: config or checkpoint)");
  cmd->add_option("--split-seed", s.split_seed, "Split seed (default: config or checkpoint)");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Semi-supervised stress detection on wearable and phone sequences"};
  app.require_subcommand(1);

  FeaturesArgs fa;
  auto* features = app.add_subcommand("features", "Extract per-step HRV, SC and phone features into a stream CSV");
  features->add_option("--rr", fa.rr, "RR intervals CSV: participant_id,timestamp,rr_ms");
  features->add_option("--sc", fa.sc, "Skin conductance CSV with sample_rate_hz line");
  features->add_option("--phone", fa.phone, "Phone event log CSV");
  features->add_option("--app-map", fa.app_map, "app_name,category file");
  features->add_option("--resolution", fa.resolution, "Minutes per step");
  features->add_option("--out", fa.out, "Output stream CSV")->required();

  SegmentArgs sa;
  auto* segment = app.add_subcommand("segment", "Cut a feature stream into labeled and unlabeled windows");
  segment->add_option("--stream", sa.stream, "Stream CSV")->required();
  segment->add_option("--labels", sa.labels, "Label CSV: participant_id,timestamp,raw_level");
  segment->add_option("--length", sa.length, "Steps per window");
  segment->add_option("--resolution", sa.resolution, "Minutes per step");
  segment->add_option("--rule", sa.rule, "smile | crosscheck | zscore | threshold:N");
  segment->add_option("--out", sa.out, "Dataset directory")->required();

  SynthArgs sy;
  auto* synth_cmd = app.add_subcommand("synth", "Generate a synthetic dataset");
  synth_cmd->add_option("--spec", sy.spec, "Synthetic spec JSON (defaults when omitted)");
  synth_cmd->add_option("--seed", sy.seed, "Override the spec seed");
  synth_cmd->add_option("--out", sy.out, "Dataset directory")->required();

  AugmentArgs au;
  auto* augment_cmd = app.add_subcommand("augment", "Write augmented copies and per-operator before/after CSV");
  augment_cmd->add_option("--dataset", au.dataset, "Dataset directory")->required();
  augment_cmd->add_option("--config", au.config, "Experiment config (augmentation section)");
  augment_cmd->add_option("--copies", au.copies, "Copies per window");
  augment_cmd->add_option("--seed", au.seed, "Seed");
  augment_cmd->add_option("--window", au.window, "Window index for the operator CSV");
  augment_cmd->add_option("--limit", au.limit, "Augment only the first N windows");
  augment_cmd->add_option("--out", au.out, "Output directory")->required();

  PretrainArgs pa;
  auto* pretrain = app.add_subcommand("pretrain", "Train the sequence autoencoder");
  pretrain->add_option("--dataset", pa.dataset, "Dataset directory (default: config)");
  pretrain->add_option("--spec", pa.spec, "Experiment config")->required();
  pretrain->add_option("--out", pa.out, "Checkpoint path")->required();
  pretrain->add_option("--loss-curve", pa.loss_curve, "Loss curve CSV");
  pretrain->add_option("--seed", pa.seed, "Seed");
  pretrain->add_flag("--labeled-only", pa.labeled_only, "Train on labeled windows (active-sampling stage one)");
  pretrain->add_flag("--reverse-decode", pa.reverse_decode, "Decoder emits the sequence reversed");
  pretrain->add_option("--labeled-latents", pa.labeled_latents, "Write labeled latents CSV");
  pretrain->add_option("--unlabeled-latents", pa.unlabeled_latents, "Write unlabeled latents CSV");
  add_split_flags(pretrain, pa.split);

  SelectArgs se;
  auto* select = app.add_subcommand("select", "Fit the latent GMM and select unlabeled windows by NLL");
  select->add_option("--labeled-latents", se.labeled, "Labeled latents CSV")->required();
  select->add_option("--unlabeled-latents", se.unlabeled, "Unlabeled latents CSV")->required();
  select->add_option("--k-range", se.k_range, "Component range lo:hi");
  select->add_option("--threshold", se.threshold, "NLL threshold")->required();
  select->add_option("--gmm-space", se.gmm_space, "latent | pca:<d>");
  select->add_option("--seed", se.seed, "Seed");
  select->add_option("--report", se.report, "Report CSV")->required();

  TrainArgs ta;
  auto* train_cmd = app.add_subcommand("train", "Train one fold");
  train_cmd->add_option("--config", ta.config, "Experiment config")->required();
  train_cmd->add_option("--dataset", ta.dataset, "Dataset directory (default: config)");
  train_cmd->add_option("--fold", ta.fold, "Validation fold");
  train_cmd->add_option("--seed", ta.seed, "Seed");
  train_cmd->add_option("--out", ta.out, "Output directory")->required();

  EvaluateArgs ea;
  auto* evaluate = app.add_subcommand("evaluate", "Score a checkpoint on a validation fold");
  evaluate->add_option("--checkpoint", ea.checkpoint, "Classifier checkpoint")->required();
  evaluate->add_option("--dataset", ea.dataset, "Dataset directory")->required();
  evaluate->add_option("--report", ea.report, "Report CSV")->required();
  add_split_flags(evaluate, ea.split);

  SweepArgs sw;
  auto* sweep = app.add_subcommand("sweep", "Active vs random pretraining pools across NLL thresholds");
  sweep->add_option("--config", sw.config, "Experiment config")->required();
  sweep->add_option("--thresholds", sw.thresholds, "Comma-separated NLL thresholds (default: config)");
  sweep->add_option("--seeds", sw.seeds, "Seeds: a,b,c or lo..hi");
  sweep->add_option("--synth", sw.synth, "Draw a synthetic dataset per seed from this spec");
  sweep->add_option("--folds-run", sw.folds_run, "Comma-separated folds to run (default: all)");
  sweep->add_option("--out", sw.out, "Output directory")->required();

  SaliencyArgs sl;
  auto* sal = app.add_subcommand("saliency", "Average saliency map and effective horizon");
  sal->add_option("--checkpoint", sl.checkpoint, "Classifier checkpoint")->required();
  sal->add_option("--dataset", sl.dataset, "Dataset directory")->required();
  sal->add_option("--out", sl.out, "Map CSV")->required();
  sal->add_option("--heatmap", sl.heatmap, "Long-format heatmap CSV");
  sal->add_flag("--correct-only", sl.correct_only, "Average only correctly classified windows");
  sal->add_option("--threshold", sl.threshold, "Horizon threshold");
  add_split_flags(sal, sl.split);

  BenchArgs ba;
  auto* bench = app.add_subcommand("bench", "Ablation over methods on synthetic data");
  bench->add_option("--spec", ba.spec, "Synthetic spec JSON");
  bench->add_option("--config", ba.config, "Experiment config");
  bench->add_option("--methods", ba.methods, "all or comma-separated methods");
  bench->add_option("--seeds", ba.seeds, "Seeds: a,b,c or lo..hi");
  bench->add_option("--folds-run", ba.folds_run, "Comma-separated folds to run (default: all)");
  bench->add_option("--out", ba.out, "Results CSV")->required();
  bench->add_option("--markdown", ba.markdown, "Markdown summary (default: results path with .md)");
  bench->add_option("--runs", ba.runs, "Per-run CSV");

  CLI11_PARSE(app, argc, argv);
  try {
    if (*features) return run_features(fa);
    if (*segment) return run_segment(sa);
    if (*synth_cmd) return run_synth(sy);
    if (*augment_cmd) return run_augment(au);
    if (*pretrain) return run_pretrain(pa);
    if (*select) return run_select(se);
    if (*train_cmd) return run_train(ta);
    if (*evaluate) return run_evaluate(ea);
    if (*sweep) return run_sweep(sw);
    if (*sal) return run_saliency(sl);
    if (*bench) return run_bench(ba);
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 1;
  }
  return 0;
}
