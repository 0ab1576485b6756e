// SPDX-License-Identifier: Apache-2.0
#include "sslseq/config.hpp"

#include <fstream>
#include <set>
#include <stdexcept>

namespace sslseq::config {

using nlohmann::json;

namespace {

void reject_unknown(const json& j, const std::set<std::string>& known, const std::string& where) {
  if (!j.is_object()) throw std::invalid_argument(where + ": expected an object");
  for (const auto& [key, _] : j.items()) {
    if (!known.count(key)) throw std::invalid_argument(where + ": unknown key '" + key + "'");
  }
}

augment::NormalDist dist_from(const json& j, augment::NormalDist d) {
  d.mean = j.value("mean", d.mean);
  d.stddev = j.value("std", d.stddev);
  return d;
}

}  // namespace

json to_json(const augment::AugmentationSpec& a) {
  json ops = json::array();
  for (auto op : a.ops) ops.push_back(augment::to_string(op));
  return {{"ops", ops},
          {"jitter_sigma", a.jitter_sigma},
          {"scale", {{"mean", a.scale_dist.mean}, {"std", a.scale_dist.stddev}}},
          {"scale_per", a.scale_per == augment::ScalePer::feature ? "feature" : "window"},
          {"magnitude_warp", {{"mean", a.mw_dist.mean}, {"std", a.mw_dist.stddev}, {"knots", a.mw_knots}}},
          {"time_warp", {{"sigma", a.tw_sigma}, {"knots", a.tw_knots}}},
          {"copies", a.copies}};
}

augment::AugmentationSpec augmentation_from_json(const json& j) {
  reject_unknown(j, {"ops", "jitter_sigma", "scale", "scale_per", "magnitude_warp", "time_warp", "copies"},
                 "augmentation");
  augment::AugmentationSpec a;
  if (j.contains("ops")) {
    a.ops.clear();
    for (const auto& op : j.at("ops")) a.ops.push_back(augment::parse_op(op.get<std::string>()));
  }
  a.jitter_sigma = j.value("jitter_sigma", a.jitter_sigma);
  if (j.contains("scale")) a.scale_dist = dist_from(j.at("scale"), a.scale_dist);
  if (j.contains("scale_per")) {
    const auto per = j.at("scale_per").get<std::string>();
    if (per != "feature" && per != "window") throw std::invalid_argument("augmentation: scale_per feature|window");
    a.scale_per = per == "feature" ? augment::ScalePer::feature : augment::ScalePer::window;
  }
  if (j.contains("magnitude_warp")) {
    a.mw_dist = dist_from(j.at("magnitude_warp"), a.mw_dist);
    a.mw_knots = j.at("magnitude_warp").value("knots", a.mw_knots);
  }
  if (j.contains("time_warp")) {
    a.tw_sigma = j.at("time_warp").value("sigma", a.tw_sigma);
    a.tw_knots = j.at("time_warp").value("knots", a.tw_knots);
  }
  a.copies = j.value("copies", a.copies);
  a.validate();
  return a;
}

json to_json(const ae::AePretrainSpec& p) {
  return {{"noise_sigma", p.noise_sigma},
          {"epochs", p.epochs},
          {"batch_size", p.batch_size},
          {"learning_rate", p.learning_rate},
          {"source", p.unlabeled_source == ae::AePretrainSpec::Source::all ? "all" : "active_selected"},
          {"holdout_fraction", p.holdout_fraction},
          {"reverse_decode", p.reverse_decode}};
}

ae::AePretrainSpec pretrain_from_json(const json& j) {
  reject_unknown(j, {"noise_sigma", "epochs", "batch_size", "learning_rate", "source", "holdout_fraction",
                     "reverse_decode"},
                 "pretrain");
  ae::AePretrainSpec p;
  p.noise_sigma = j.value("noise_sigma", p.noise_sigma);
  p.epochs = j.value("epochs", p.epochs);
  p.batch_size = j.value("batch_size", p.batch_size);
  p.learning_rate = j.value("learning_rate", p.learning_rate);
  const auto src = j.value("source", std::string("all"));
  if (src == "all") p.unlabeled_source = ae::AePretrainSpec::Source::all;
  else if (src == "active_selected") p.unlabeled_source = ae::AePretrainSpec::Source::active_selected;
  else throw std::invalid_argument("pretrain.source must be 'all' or 'active_selected'");
  p.holdout_fraction = j.value("holdout_fraction", p.holdout_fraction);
  p.reverse_decode = j.value("reverse_decode", p.reverse_decode);
  p.validate();
  return p;
}

nn::NetworkSpec ExperimentConfig::network(int input_dim) const {
  if (network_override.is_object() && !network_override.empty()) {
    json j = network_override;
    j["input_dim"] = input_dim;
    return nn::network_spec_from_json(j);
  }
  return nn::NetworkSpec::preset(network_preset, input_dim);
}

train::TrainSpec ExperimentConfig::resolved(int input_dim) const {
  train::TrainSpec s = train;
  s.network = network(input_dim);
  s.validate();
  return s;
}

ExperimentConfig config_from_json(const json& j, const std::filesystem::path& base_dir) {
  reject_unknown(j,
                 {"dataset", "method", "network", "epochs", "batch_size", "learning_rate", "loss_weights",
                  "augmentation", "unlabeled_batch_ratio", "scaler_uses_unlabeled", "pretrain", "active", "folds",
                  "split_seed", "seeds", "thresholds"},
                 "config");
  ExperimentConfig c;
  if (j.contains("dataset")) {
    std::filesystem::path p = j.at("dataset").get<std::string>();
    c.dataset = (p.is_relative() && !base_dir.empty() ? base_dir / p : p).string();
  }
  auto& t = c.train;
  t.method = train::parse_method(j.value("method", std::string("baseline")));
  if (j.contains("network")) {
    const auto& n = j.at("network");
    if (n.is_string()) {
      c.network_preset = n.get<std::string>();
      // Presets carry the learning rates used with them unless overridden.
      if (c.network_preset == "smile") t.learning_rate = 1e-4;
      if (c.network_preset == "tiles" || c.network_preset == "crosscheck") t.learning_rate = 5e-5;
    } else {
      c.network_override = n;
    }
  }
  t.epochs = j.value("epochs", t.epochs);
  t.batch_size = j.value("batch_size", t.batch_size);
  t.learning_rate = j.value("learning_rate", t.learning_rate);
  if (j.contains("loss_weights")) {
    const auto& w = j.at("loss_weights");
    reject_unknown(w, {"alpha", "lambda", "M"}, "loss_weights");
    t.weights.alpha = w.value("alpha", t.weights.alpha);
    t.weights.lambda = w.value("lambda", t.weights.lambda);
    t.weights.copies = w.value("M", t.weights.copies);
  }
  if (j.contains("augmentation")) t.augmentation = augmentation_from_json(j.at("augmentation"));
  t.augmentation.copies = t.weights.copies;
  t.unlabeled_batch_ratio = j.value("unlabeled_batch_ratio", t.unlabeled_batch_ratio);
  t.scaler_uses_unlabeled = j.value("scaler_uses_unlabeled", t.scaler_uses_unlabeled);
  if (j.contains("pretrain")) t.pretrain = pretrain_from_json(j.at("pretrain"));
  if (j.contains("active")) {
    const auto& a = j.at("active");
    reject_unknown(a, {"threshold", "k_min", "k_max", "gmm_space", "labeled_ae_epochs"}, "active");
    t.active_threshold = a.value("threshold", t.active_threshold);
    t.gmm_k_min = a.value("k_min", t.gmm_k_min);
    t.gmm_k_max = a.value("k_max", t.gmm_k_max);
    t.gmm_space = active::GmmSpace::parse(a.value("gmm_space", std::string("latent")));
    t.labeled_ae_epochs = a.value("labeled_ae_epochs", t.labeled_ae_epochs);
  }
  c.folds = j.value("folds", c.folds);
  if (c.folds < 2) throw std::invalid_argument("config: folds must be >= 2");
  c.split_seed = j.value("split_seed", c.split_seed);
  if (j.contains("seeds")) c.seeds = j.at("seeds").get<std::vector<std::uint64_t>>();
  if (c.seeds.empty()) throw std::invalid_argument("config: seeds must be non-empty");
  if (j.contains("thresholds")) c.thresholds = j.at("thresholds").get<std::vector<double>>();
  return c;
}

json to_json(const ExperimentConfig& c) {
  const auto& t = c.train;
  json j = {{"dataset", c.dataset},
            {"method", train::to_string(t.method)},
            {"epochs", t.epochs},
            {"batch_size", t.batch_size},
            {"learning_rate", t.learning_rate},
            {"loss_weights", {{"alpha", t.weights.alpha}, {"lambda", t.weights.lambda}, {"M", t.weights.copies}}},
            {"augmentation", to_json(t.augmentation)},
            {"unlabeled_batch_ratio", t.unlabeled_batch_ratio},
            {"scaler_uses_unlabeled", t.scaler_uses_unlabeled},
            {"pretrain", to_json(t.pretrain)},
            {"active",
             {{"threshold", t.active_threshold},
              {"k_min", t.gmm_k_min},
              {"k_max", t.gmm_k_max},
              {"gmm_space", t.gmm_space.str()},
              {"labeled_ae_epochs", t.labeled_ae_epochs}}},
            {"folds", c.folds},
            {"split_seed", c.split_seed},
            {"seeds", c.seeds},
            {"thresholds", c.thresholds}};
  j["network"] = c.network_override.is_object() && !c.network_override.empty() ? c.network_override
                                                                                : json(c.network_preset);
  j["augmentation"].erase("copies");
  return j;
}

json read_json_file(const std::filesystem::path& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open " + path.string());
  try {
    return json::parse(in);
  } catch (const json::parse_error& e) {
    throw std::runtime_error(path.string() + ": " + e.what());
  }
}

ExperimentConfig load_config(const std::filesystem::path& path) {
  return config_from_json(read_json_file(path), path.parent_path());
}

}  // namespace sslseq::config
