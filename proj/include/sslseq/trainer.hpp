// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sslseq/active.hpp"
#include "sslseq/augment.hpp"
#include "sslseq/autoencoder.hpp"
#include "sslseq/checkpoint.hpp"
#include "sslseq/data.hpp"
#include "sslseq/network.hpp"

#include <json.hpp>

#include <optional>
#include <set>
#include <string>
#include <vector>

namespace sslseq::train {

/// Per-feature standardization fitted on training-fold windows.
struct Scaler {
  Vec mean;
  Vec std;

  static constexpr double kStdFloor = 1e-8;

  static Scaler fit(const std::vector<const Mat*>& windows);
  Mat transform(const Mat& window) const;
  std::vector<Mat> transform(const std::vector<const Mat*>& windows) const;
  int feature_count() const { return static_cast<int>(mean.size()); }
};

nlohmann::json to_json(const Scaler& s);
Scaler scaler_from_json(const nlohmann::json& j);

enum class Method { baseline, da, da_ae, da_cr, da_ae_cr };

std::string to_string(Method m);
Method parse_method(const std::string& text);
bool uses_augmentation(Method m);
bool uses_pretraining(Method m);
bool uses_consistency(Method m);
const std::vector<Method>& all_methods();

struct LossWeights {
  double alpha = 1.0;
  double lambda = 1.0;
  int copies = 10;  // M

  void validate() const;
};

struct TrainSpec {
  Method method = Method::baseline;
  nn::NetworkSpec network;
  int epochs = 50;
  int batch_size = 32;
  double learning_rate = 1e-3;
  LossWeights weights;
  augment::AugmentationSpec augmentation;
  double unlabeled_batch_ratio = 1.0;
  bool scaler_uses_unlabeled = true;
  ae::AePretrainSpec pretrain;
  // Active selection of the pretraining pool.
  double active_threshold = 0.0;
  int gmm_k_min = 1;
  int gmm_k_max = 10;
  active::GmmSpace gmm_space;
  int labeled_ae_epochs = 20;

  void validate() const;
};

struct LossTerms {
  double total = 0.0;
  double ce = 0.0;
  double kl_l = 0.0;
  double kl_u = 0.0;
};

/// Inputs to the composite loss with the augmented copies already drawn.
struct CompositeBatch {
  nn::Sequence labeled;
  Vec labels;
  std::vector<nn::Sequence> labeled_aug;
  nn::Sequence unlabeled;  // empty when there is no unlabeled term
  std::vector<nn::Sequence> unlabeled_aug;
  /// Consistency targets; computed by an eval-mode pass when absent.
  std::optional<Vec> p_labeled;
  std::optional<Vec> p_unlabeled;
};

struct CompositeResult {
  LossTerms terms;
  nn::Classifier grads;
  std::vector<nn::ClassifierCache> train_caches;  // for BatchNorm running statistics
};

/// L = CE + alpha/M sum KL(p_l || q_l^m) + lambda/M sum KL(p_u || q_u^m).
/// With augment_supervised the CE term averages the clean batch and its M
/// augmented copies.
CompositeResult composite_loss(const nn::Classifier& net, const CompositeBatch& batch, const LossWeights& weights,
                               RngSeed seed, bool augment_supervised = false);

/// Draws the augmented copies from `aug` and evaluates the loss above.
CompositeResult composite_loss(const nn::Classifier& net, const std::vector<const Mat*>& labeled, const Vec& labels,
                               const std::vector<const Mat*>& unlabeled, const LossWeights& weights,
                               const augment::AugmentationSpec& aug, RngSeed seed, bool augment_supervised = false);

struct EpochLog {
  int epoch = 0;
  double loss_total = 0.0;
  double loss_ce = 0.0;
  double loss_kl_l = 0.0;
  double loss_kl_u = 0.0;
  double val_f1 = 0.0;
  double val_bce = 0.0;
};

struct TrainResult {
  nn::Classifier model;
  Scaler scaler;
  std::vector<EpochLog> log;
  int best_epoch = 0;
  double best_val_f1 = 0.0;
  double initial_val_bce = 0.0;
  double initial_val_f1 = 0.0;
  long steps = 0;
};

struct TrainInputs {
  std::vector<const Mat*> labeled;  // standardized
  std::vector<int> labels;
  std::vector<const Mat*> unlabeled;
  std::vector<const Mat*> val;
  std::vector<int> val_labels;
};

/// Optimizes a classifier; returns the best-validation-f1 epoch's weights.
TrainResult fit(const TrainSpec& spec, const TrainInputs& in, const nn::Classifier& init, RngSeed seed);

/// Eval-mode probabilities for already standardized windows.
Vec predict_standardized(const nn::Classifier& net, const std::vector<const Mat*>& windows, int batch_size = 256);
/// Standardizes with the scaler, then predicts.
Vec predict(const nn::Classifier& net, const Scaler& scaler, const std::vector<const Mat*>& windows);
Vec predict(const nn::Checkpoint& ckpt, const std::vector<const Mat*>& windows);

double mean_bce(const Vec& probs, const std::vector<int>& labels);

/// Record of which participants fed each fitted statistic.
struct LeakageAudit {
  std::set<std::string> validation_participants;
  std::set<std::string> scaler_participants;
  std::set<std::string> pretrain_participants;
  bool scaler_matches_train_fold = true;  // recomputed scaler equals the stored one

  bool clean() const;
};

struct PretrainOutcome {
  bool used = false;
  nn::Autoencoder model;
  std::vector<ae::LossCurvePoint> curve;
  std::vector<std::size_t> pool;  // dataset window indices
  std::optional<active::SelectionReport> selection;
  int gmm_k = 0;
};

struct FoldOutcome {
  TrainResult train;
  PretrainOutcome pretrain;
  LeakageAudit audit;
  Vec val_probs;
  std::vector<int> val_labels;
  std::vector<std::size_t> val_index;
  double val_f1 = 0.0;
};

/// Everything one fold needs: scaler, optional pretraining, training, and
/// validation predictions from the selected epoch.
FoldOutcome run_fold(const data::Dataset& ds, const data::Split& split, int fold, const TrainSpec& spec,
                     RngSeed seed, const std::vector<std::size_t>* pretrain_pool = nullptr);

/// Scores every training-fold unlabeled window by its NLL under a mixture
/// fitted to labeled latents of an autoencoder trained on labeled data.
struct ActiveScores {
  std::vector<std::size_t> labeled;    // dataset indices
  std::vector<std::size_t> unlabeled;  // dataset indices
  Vec labeled_nll;
  Vec unlabeled_nll;
  int k = 0;
  std::vector<active::IcRow> ic_table;
};

ActiveScores score_unlabeled(const data::Dataset& ds, const data::Split& split, int fold, const TrainSpec& spec,
                             const Scaler& scaler, RngSeed seed);

Scaler fit_fold_scaler(const data::Dataset& ds, const data::Split& split, int fold, bool include_unlabeled,
                       std::set<std::string>* participants = nullptr);

nn::Checkpoint to_checkpoint(const TrainResult& result, std::uint64_t seed, const TrainSpec& spec);

}  // namespace sslseq::train
