// SPDX-License-Identifier: Apache-2.0
#include "sslseq/trainer.hpp"

#include "sslseq/evaluation.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <stdexcept>
#include <utility>

namespace sslseq::train {

// ---------------------------------------------------------------- Scaler ----

Scaler Scaler::fit(const std::vector<const Mat*>& windows) {
  if (windows.empty()) throw InsufficientDataError("Scaler::fit: no windows");
  const Eigen::Index f = windows.front()->cols();
  Vec sum = Vec::Zero(f);
  double rows = 0.0;
  for (const Mat* w : windows) {
    if (w->cols() != f) throw DimensionError("Scaler::fit: feature count mismatch");
    sum += w->colwise().sum().transpose();
    rows += static_cast<double>(w->rows());
  }
  Scaler s;
  s.mean = sum / rows;
  Vec ss = Vec::Zero(f);
  for (const Mat* w : windows) ss += (w->rowwise() - s.mean.transpose()).array().square().colwise().sum().matrix().transpose();
  s.std = (ss / rows).array().sqrt().max(kStdFloor).matrix();
  return s;
}

Mat Scaler::transform(const Mat& window) const {
  if (window.cols() != mean.size()) {
    throw DimensionError("Scaler: expected " + std::to_string(mean.size()) + " features, got " +
                         std::to_string(window.cols()));
  }
  return ((window.rowwise() - mean.transpose()).array().rowwise() / std.transpose().array()).matrix();
}

std::vector<Mat> Scaler::transform(const std::vector<const Mat*>& windows) const {
  std::vector<Mat> out;
  out.reserve(windows.size());
  for (const Mat* w : windows) out.push_back(transform(*w));
  return out;
}

nlohmann::json to_json(const Scaler& s) {
  return {{"mean", std::vector<double>(s.mean.data(), s.mean.data() + s.mean.size())},
          {"std", std::vector<double>(s.std.data(), s.std.data() + s.std.size())}};
}

Scaler scaler_from_json(const nlohmann::json& j) {
  const auto m = j.at("mean").get<std::vector<double>>();
  const auto s = j.at("std").get<std::vector<double>>();
  if (m.size() != s.size()) throw DimensionError("scaler: mean/std length mismatch");
  Scaler out;
  out.mean = Eigen::Map<const Vec>(m.data(), static_cast<Eigen::Index>(m.size()));
  out.std = Eigen::Map<const Vec>(s.data(), static_cast<Eigen::Index>(s.size()));
  return out;
}

// --------------------------------------------------------------- Methods ----

std::string to_string(Method m) {
  switch (m) {
    case Method::baseline: return "baseline";
    case Method::da: return "da";
    case Method::da_ae: return "da_ae";
    case Method::da_cr: return "da_cr";
    case Method::da_ae_cr: return "da_ae_cr";
  }
  return "?";
}

Method parse_method(const std::string& text) {
  for (Method m : all_methods()) {
    if (to_string(m) == text) return m;
  }
  throw std::invalid_argument("unknown method '" + text + "' (baseline, da, da_ae, da_cr, da_ae_cr)");
}

const std::vector<Method>& all_methods() {
  static const std::vector<Method> methods{Method::baseline, Method::da, Method::da_ae, Method::da_cr,
                                           Method::da_ae_cr};
  return methods;
}

bool uses_augmentation(Method m) { return m != Method::baseline; }
bool uses_pretraining(Method m) { return m == Method::da_ae || m == Method::da_ae_cr; }
bool uses_consistency(Method m) { return m == Method::da_cr || m == Method::da_ae_cr; }

void LossWeights::validate() const {
  if (alpha < 0 || lambda < 0) throw std::invalid_argument("LossWeights: alpha and lambda must be >= 0");
  if (copies < 1) throw std::invalid_argument("LossWeights: M must be >= 1");
}

void TrainSpec::validate() const {
  network.validate();
  weights.validate();
  if (epochs < 1 || batch_size < 2) throw std::invalid_argument("TrainSpec: epochs >= 1 and batch_size >= 2");
  if (learning_rate <= 0) throw std::invalid_argument("TrainSpec: learning_rate must be > 0");
  if (unlabeled_batch_ratio < 0) throw std::invalid_argument("TrainSpec: unlabeled_batch_ratio must be >= 0");
  if (uses_augmentation(method)) augmentation.validate();
  if (uses_pretraining(method)) pretrain.validate();
}

// -------------------------------------------------------- Composite loss ----

namespace {

void accumulate(nn::Classifier& acc, const nn::Classifier& g) {
  auto dst = acc.param_ptrs();
  const auto src = std::as_const(g).param_ptrs();
  for (std::size_t k = 0; k < dst.size(); ++k) *dst[k] += *src[k];
}

void check_finite(double v, const char* term) {
  if (!std::isfinite(v)) {
    throw std::runtime_error(std::string("composite_loss: term ") + term + " is not finite (" + std::to_string(v) +
                             ")");
  }
}

// Negative values beyond rounding would mean a broken KL.
void check_kl(double v, const char* term) {
  check_finite(v, term);
  if (v < -1e-12) throw std::runtime_error(std::string("composite_loss: negative KL in ") + term);
}

}  // namespace

CompositeResult composite_loss(const nn::Classifier& net, const CompositeBatch& batch, const LossWeights& weights,
                               RngSeed seed, bool augment_supervised) {
  weights.validate();
  const std::size_t M = static_cast<std::size_t>(weights.copies);
  const bool labeled_copies = weights.alpha > 0 || augment_supervised;
  const bool unlabeled_term = weights.lambda > 0 && !batch.unlabeled.empty();
  if (labeled_copies && batch.labeled_aug.size() != M) {
    throw DimensionError("composite_loss: expected " + std::to_string(M) + " augmented labeled copies");
  }
  if (unlabeled_term && batch.unlabeled_aug.size() != M) {
    throw DimensionError("composite_loss: expected " + std::to_string(M) + " augmented unlabeled copies");
  }

  CompositeResult out;
  out.grads = net.zeros_like();
  const double ce_weight = augment_supervised ? 1.0 / static_cast<double>(M + 1) : 1.0;
  const double md = static_cast<double>(M);

  auto ce_fwd = nn::classifier_forward(net, batch.labeled, nn::Mode::train, RngSeed{derive_seed(seed.value, 1)});
  const auto ce = nn::bce_loss(ce_fwd.logits, batch.labels);
  check_finite(ce.loss, "ce");
  double ce_sum = ce.loss;
  accumulate(out.grads, nn::classifier_backward(net, ce_fwd.cache, ce_weight * ce.grad).grads);
  out.train_caches.push_back(std::move(ce_fwd.cache));

  double kl_l = 0.0;
  if (labeled_copies) {
    Vec p;
    if (weights.alpha > 0) {
      p = batch.p_labeled ? *batch.p_labeled
                          : nn::sigmoid(nn::classifier_forward(net, batch.labeled, nn::Mode::eval, seed).logits);
    }
    for (std::size_t m = 0; m < M; ++m) {
      auto fwd = nn::classifier_forward(net, batch.labeled_aug[m], nn::Mode::train,
                                        RngSeed{derive_seed(seed.value, 2, m)});
      Vec g = Vec::Zero(fwd.logits.size());
      if (augment_supervised) {
        const auto b = nn::bce_loss(fwd.logits, batch.labels);
        check_finite(b.loss, "ce");
        ce_sum += b.loss;
        g += ce_weight * b.grad;
      }
      if (weights.alpha > 0) {
        const auto kl = nn::kl_bernoulli(p, fwd.logits);
        check_kl(kl.loss, "kl_labeled");
        kl_l += kl.loss;
        g += (weights.alpha / md) * kl.grad;
      }
      accumulate(out.grads, nn::classifier_backward(net, fwd.cache, g).grads);
      out.train_caches.push_back(std::move(fwd.cache));
    }
  }

  double kl_u = 0.0;
  if (unlabeled_term) {
    const Vec p = batch.p_unlabeled
                      ? *batch.p_unlabeled
                      : nn::sigmoid(nn::classifier_forward(net, batch.unlabeled, nn::Mode::eval, seed).logits);
    for (std::size_t m = 0; m < M; ++m) {
      auto fwd = nn::classifier_forward(net, batch.unlabeled_aug[m], nn::Mode::train,
                                        RngSeed{derive_seed(seed.value, 3, m)});
      const auto kl = nn::kl_bernoulli(p, fwd.logits);
      check_kl(kl.loss, "kl_unlabeled");
      kl_u += kl.loss;
      accumulate(out.grads, nn::classifier_backward(net, fwd.cache, (weights.lambda / md) * kl.grad).grads);
      out.train_caches.push_back(std::move(fwd.cache));
    }
  }

  out.terms.ce = ce_sum * ce_weight;
  out.terms.kl_l = weights.alpha > 0 ? kl_l / md : 0.0;
  out.terms.kl_u = unlabeled_term ? kl_u / md : 0.0;
  out.terms.total = out.terms.ce + weights.alpha * out.terms.kl_l + weights.lambda * out.terms.kl_u;
  check_finite(out.terms.total, "total");
  return out;
}

namespace {

std::vector<nn::Sequence> augmented_copies(const std::vector<const Mat*>& windows, const augment::AugmentationSpec& aug,
                                           std::size_t copies, std::uint64_t seed) {
  std::vector<nn::Sequence> out;
  out.reserve(copies);
  std::vector<Mat> batch(windows.size());
  for (std::size_t m = 0; m < copies; ++m) {
    const std::uint64_t copy_seed = derive_seed(seed, m);
    for (std::size_t i = 0; i < windows.size(); ++i) {
      batch[i] = augment::apply(*windows[i], aug, RngSeed{derive_seed(copy_seed, i)});
    }
    out.push_back(nn::to_sequence(batch));
  }
  return out;
}

}  // namespace

CompositeResult composite_loss(const nn::Classifier& net, const std::vector<const Mat*>& labeled, const Vec& labels,
                               const std::vector<const Mat*>& unlabeled, const LossWeights& weights,
                               const augment::AugmentationSpec& aug, RngSeed seed, bool augment_supervised) {
  CompositeBatch batch;
  batch.labeled = nn::to_sequence(labeled);
  batch.labels = labels;
  const std::size_t M = static_cast<std::size_t>(weights.copies);
  if (weights.alpha > 0 || augment_supervised) {
    batch.labeled_aug = augmented_copies(labeled, aug, M, derive_seed(seed.value, 0xa1));
  }
  if (weights.lambda > 0 && !unlabeled.empty()) {
    batch.unlabeled = nn::to_sequence(unlabeled);
    batch.unlabeled_aug = augmented_copies(unlabeled, aug, M, derive_seed(seed.value, 0xa2));
  }
  return composite_loss(net, batch, weights, seed, augment_supervised);
}

// ------------------------------------------------------------- Training ----

double mean_bce(const Vec& probs, const std::vector<int>& labels) {
  if (labels.empty()) return 0.0;
  double s = 0.0;
  for (std::size_t i = 0; i < labels.size(); ++i) {
    const double p = std::clamp(probs(static_cast<Eigen::Index>(i)), 1e-7, 1.0 - 1e-7);
    s -= labels[i] ? std::log(p) : std::log(1.0 - p);
  }
  return s / static_cast<double>(labels.size());
}

Vec predict_standardized(const nn::Classifier& net, const std::vector<const Mat*>& windows, int batch_size) {
  Vec out(static_cast<Eigen::Index>(windows.size()));
  for (std::size_t lo = 0; lo < windows.size(); lo += static_cast<std::size_t>(batch_size)) {
    const std::size_t hi = std::min(windows.size(), lo + static_cast<std::size_t>(batch_size));
    std::vector<const Mat*> chunk(windows.begin() + static_cast<std::ptrdiff_t>(lo),
                                  windows.begin() + static_cast<std::ptrdiff_t>(hi));
    const auto fwd = nn::classifier_forward(net, nn::to_sequence(chunk), nn::Mode::eval, RngSeed{0});
    out.segment(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(hi - lo)) = nn::sigmoid(fwd.logits);
  }
  return out;
}

Vec predict(const nn::Classifier& net, const Scaler& scaler, const std::vector<const Mat*>& windows) {
  const auto z = scaler.transform(windows);
  std::vector<const Mat*> ptrs;
  for (const auto& m : z) ptrs.push_back(&m);
  return predict_standardized(net, ptrs);
}

Vec predict(const nn::Checkpoint& ckpt, const std::vector<const Mat*>& windows) {
  const auto net = nn::classifier_from_checkpoint(ckpt);
  const auto& extra = ckpt.header.at("extra");
  if (!extra.contains("scaler")) throw std::runtime_error("predict: checkpoint carries no scaler");
  return predict(net, scaler_from_json(extra.at("scaler")), windows);
}

namespace {

// Batches of at least two windows so BatchNorm has batch statistics.
std::vector<std::pair<std::size_t, std::size_t>> batch_bounds(std::size_t n, std::size_t bs) {
  std::vector<std::pair<std::size_t, std::size_t>> out;
  for (std::size_t lo = 0; lo < n; lo += bs) out.emplace_back(lo, std::min(n, lo + bs));
  if (out.size() > 1 && out.back().second - out.back().first < 2) {
    out[out.size() - 2].second = out.back().second;
    out.pop_back();
  }
  return out;
}

}  // namespace

TrainResult fit(const TrainSpec& spec, const TrainInputs& in, const nn::Classifier& init, RngSeed seed) {
  spec.validate();
  if (in.labeled.empty()) throw InsufficientDataError("train: empty labeled training set");
  if (in.labeled.size() < 2) throw InsufficientDataError("train: need at least 2 labeled training windows");
  if (in.labels.size() != in.labeled.size()) throw DimensionError("train: label count mismatch");

  TrainResult res;
  nn::Classifier net = init;
  nn::AdamState adam;
  adam.learning_rate = spec.learning_rate;

  LossWeights w = spec.weights;
  if (!uses_consistency(spec.method)) {
    w.alpha = 0.0;
    w.lambda = 0.0;
  }
  const bool aug_sup = uses_augmentation(spec.method);
  const bool use_unlabeled = w.lambda > 0 && in.unlabeled.size() >= 2 && spec.unlabeled_batch_ratio > 0;

  Rng order_rng(derive_seed(seed.value, 0x77));
  Rng pool_rng(derive_seed(seed.value, 0x78));
  std::vector<std::size_t> order(in.labeled.size());
  std::iota(order.begin(), order.end(), 0);
  std::vector<std::size_t> pool(in.unlabeled.size());
  std::iota(pool.begin(), pool.end(), 0);
  if (use_unlabeled) shuffle(pool, pool_rng);
  std::size_t cursor = 0;

  auto validate_now = [&](EpochLog& row) {
    if (in.val.empty()) return;
    const Vec p = predict_standardized(net, in.val);
    row.val_f1 = eval::f1_score(p, in.val_labels);
    row.val_bce = mean_bce(p, in.val_labels);
  };

  EpochLog initial;
  validate_now(initial);
  res.initial_val_bce = initial.val_bce;
  res.initial_val_f1 = initial.val_f1;
  res.best_val_f1 = -1.0;

  for (int epoch = 1; epoch <= spec.epochs; ++epoch) {
    shuffle(order, order_rng);
    EpochLog row;
    row.epoch = epoch;
    const auto bounds = batch_bounds(order.size(), static_cast<std::size_t>(spec.batch_size));
    for (const auto& [lo, hi] : bounds) {
      std::vector<const Mat*> lab;
      Vec y(static_cast<Eigen::Index>(hi - lo));
      for (std::size_t k = lo; k < hi; ++k) {
        lab.push_back(in.labeled[order[k]]);
        y(static_cast<Eigen::Index>(k - lo)) = in.labels[order[k]];
      }
      std::vector<const Mat*> unl;
      if (use_unlabeled) {
        const auto want = std::max<std::size_t>(
            2, static_cast<std::size_t>(std::ceil(spec.unlabeled_batch_ratio * static_cast<double>(hi - lo))));
        for (std::size_t k = 0; k < want; ++k) {
          if (cursor == pool.size()) {
            shuffle(pool, pool_rng);
            cursor = 0;
          }
          unl.push_back(in.unlabeled[pool[cursor++]]);
        }
      }
      const RngSeed step_seed{derive_seed(seed.value, 0x5e, static_cast<std::uint64_t>(res.steps))};
      auto out = composite_loss(net, lab, y, unl, w, spec.augmentation, step_seed, aug_sup);
      nn::adam_step(adam, net.param_ptrs(), std::as_const(out.grads).param_ptrs());
      for (const auto& c : out.train_caches) nn::update_running_stats(net, c);
      row.loss_total += out.terms.total;
      row.loss_ce += out.terms.ce;
      row.loss_kl_l += out.terms.kl_l;
      row.loss_kl_u += out.terms.kl_u;
      ++res.steps;
    }
    const double nb = static_cast<double>(bounds.size());
    row.loss_total /= nb;
    row.loss_ce /= nb;
    row.loss_kl_l /= nb;
    row.loss_kl_u /= nb;
    validate_now(row);
    res.log.push_back(row);
    if (in.val.empty() || row.val_f1 > res.best_val_f1) {
      res.best_val_f1 = row.val_f1;
      res.best_epoch = epoch;
      res.model = net;
    }
  }
  return res;
}

// ------------------------------------------------------------ Fold level ----

bool LeakageAudit::clean() const {
  for (const auto& p : validation_participants) {
    if (scaler_participants.count(p) || pretrain_participants.count(p)) return false;
  }
  return scaler_matches_train_fold;
}

Scaler fit_fold_scaler(const data::Dataset& ds, const data::Split& split, int fold, bool include_unlabeled,
                       std::set<std::string>* participants) {
  std::vector<const Mat*> ws;
  for (std::size_t i : split.train_windows(ds, fold)) {
    const auto& w = ds.windows[i];
    if (!w.labeled() && !include_unlabeled) continue;
    ws.push_back(&w.features);
    if (participants) participants->insert(w.participant_id);
  }
  return Scaler::fit(ws);
}

namespace {

std::vector<const Mat*> pointers(const std::vector<Mat>& zs, const std::vector<std::size_t>& idx) {
  std::vector<const Mat*> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(&zs[i]);
  return out;
}

std::vector<Mat> gather_copies(const std::vector<Mat>& zs, const std::vector<std::size_t>& idx) {
  std::vector<Mat> out;
  out.reserve(idx.size());
  for (std::size_t i : idx) out.push_back(zs[i]);
  return out;
}

}  // namespace

ActiveScores score_unlabeled(const data::Dataset& ds, const data::Split& split, int fold, const TrainSpec& spec,
                             const Scaler& scaler, RngSeed seed) {
  ActiveScores out;
  for (std::size_t i : split.train_windows(ds, fold)) {
    (ds.windows[i].labeled() ? out.labeled : out.unlabeled).push_back(i);
  }
  if (out.labeled.size() < 2) throw InsufficientDataError("active selection: too few labeled training windows");
  std::vector<Mat> lab, unl;
  for (std::size_t i : out.labeled) lab.push_back(scaler.transform(ds.windows[i].features));
  for (std::size_t i : out.unlabeled) unl.push_back(scaler.transform(ds.windows[i].features));

  ae::AePretrainSpec opt = spec.pretrain;
  opt.epochs = spec.labeled_ae_epochs;
  const auto lab_ae = ae::pretrain(lab, spec.network, opt, RngSeed{derive_seed(seed.value, 0xa5)});
  Mat zl = ae::latents(lab_ae.model, lab);
  Mat zu = unl.empty() ? Mat(0, zl.cols()) : ae::latents(lab_ae.model, unl);
  if (spec.gmm_space.pca_dims > 0) {
    const auto proj = active::pca_project(zl, spec.gmm_space.pca_dims);
    zl = proj.points;
    if (zu.rows() > 0) zu = active::pca_apply(proj, zu);
  }
  const auto sel = active::select_k(zl, spec.gmm_k_min, spec.gmm_k_max, RngSeed{derive_seed(seed.value, 0x6e)});
  out.k = sel.k;
  out.ic_table = sel.table;
  const auto model = active::fit_gmm(zl, sel.k, RngSeed{derive_seed(seed.value, 0x6f)});
  out.labeled_nll = active::nll(model, zl);
  out.unlabeled_nll = zu.rows() > 0 ? active::nll(model, zu) : Vec();
  return out;
}

FoldOutcome run_fold(const data::Dataset& ds, const data::Split& split, int fold, const TrainSpec& spec,
                     RngSeed seed, const std::vector<std::size_t>* pretrain_pool) {
  spec.validate();
  FoldOutcome out;
  const auto train_idx = split.train_windows(ds, fold);
  const auto val_idx = split.validation_windows(ds, fold);
  for (std::size_t i : val_idx) out.audit.validation_participants.insert(ds.windows[i].participant_id);

  const Scaler scaler = fit_fold_scaler(ds, split, fold, spec.scaler_uses_unlabeled, &out.audit.scaler_participants);

  std::vector<Mat> zs(ds.windows.size());
  std::vector<std::size_t> lab_idx, unl_idx;
  for (std::size_t i : train_idx) {
    zs[i] = scaler.transform(ds.windows[i].features);
    (ds.windows[i].labeled() ? lab_idx : unl_idx).push_back(i);
  }
  for (std::size_t i : val_idx) {
    zs[i] = scaler.transform(ds.windows[i].features);
    if (ds.windows[i].labeled()) {
      out.val_index.push_back(i);
      out.val_labels.push_back(static_cast<int>(*ds.windows[i].label));
    }
  }

  const RngSeed init_seed{derive_seed(seed.value, 0xc1)};
  nn::Classifier init;
  if (uses_pretraining(spec.method)) {
    std::vector<std::size_t> pool;
    if (pretrain_pool) {
      for (std::size_t i : *pretrain_pool) {
        if (i >= ds.windows.size() || split.fold_of(ds.windows[i].participant_id) == fold) {
          throw std::invalid_argument("run_fold: pretraining pool reaches outside the training fold");
        }
      }
      pool = *pretrain_pool;
      for (std::size_t i : pool) {
        if (zs[i].size() == 0) zs[i] = scaler.transform(ds.windows[i].features);
      }
    } else if (spec.pretrain.unlabeled_source == ae::AePretrainSpec::Source::all) {
      pool = unl_idx;
    } else {
      const auto scores = score_unlabeled(ds, split, fold, spec, scaler, seed);
      auto report = active::select_by_scores(scores.labeled_nll, scores.unlabeled_nll, spec.active_threshold);
      for (std::size_t k : report.selected) pool.push_back(scores.unlabeled[k]);
      out.pretrain.selection = std::move(report);
      out.pretrain.gmm_k = scores.k;
    }
    std::sort(pool.begin(), pool.end());
    out.pretrain.pool = pool;
    if (pool.size() >= 2) {
      auto pre = ae::pretrain(gather_copies(zs, pool), spec.network, spec.pretrain,
                              RngSeed{derive_seed(seed.value, 0xae)});
      out.pretrain.used = true;
      out.pretrain.curve = pre.curve;
      out.pretrain.model = std::move(pre.model);
      for (std::size_t i : pool) out.audit.pretrain_participants.insert(ds.windows[i].participant_id);
      init = ae::transplant(out.pretrain.model, spec.network, init_seed);
    } else {
      init = nn::Classifier::init(spec.network, init_seed);
    }
  } else {
    init = nn::Classifier::init(spec.network, init_seed);
  }

  TrainInputs in;
  in.labeled = pointers(zs, lab_idx);
  for (std::size_t i : lab_idx) in.labels.push_back(static_cast<int>(*ds.windows[i].label));
  if (uses_consistency(spec.method)) in.unlabeled = pointers(zs, unl_idx);
  in.val = pointers(zs, out.val_index);
  in.val_labels = out.val_labels;

  out.train = fit(spec, in, init, seed);
  out.train.scaler = scaler;

  const Scaler again = fit_fold_scaler(ds, split, fold, spec.scaler_uses_unlabeled);
  out.audit.scaler_matches_train_fold = again.mean == scaler.mean && again.std == scaler.std;

  if (!in.val.empty()) {
    out.val_probs = predict_standardized(out.train.model, in.val);
    out.val_f1 = eval::f1_score(out.val_probs, out.val_labels);
  }
  return out;
}

nn::Checkpoint to_checkpoint(const TrainResult& result, std::uint64_t seed, const TrainSpec& spec) {
  nlohmann::json extra = {{"scaler", to_json(result.scaler)},
                          {"method", to_string(spec.method)},
                          {"best_epoch", result.best_epoch},
                          {"best_val_f1", result.best_val_f1}};
  return nn::to_checkpoint(result.model, seed, result.steps, std::move(extra));
}

}  // namespace sslseq::train
