// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sslseq/trainer.hpp"

#include <json.hpp>

#include <filesystem>
#include <string>
#include <vector>

namespace sslseq::config {

nlohmann::json to_json(const augment::AugmentationSpec& a);
augment::AugmentationSpec augmentation_from_json(const nlohmann::json& j);

nlohmann::json to_json(const ae::AePretrainSpec& p);
ae::AePretrainSpec pretrain_from_json(const nlohmann::json& j);

/// Declarative experiment description; see docs/config.md.
struct ExperimentConfig {
  std::string dataset;
  std::string network_preset = "desk";
  nlohmann::json network_override;  // explicit NetworkSpec fields, input_dim optional
  train::TrainSpec train;
  int folds = 5;
  std::uint64_t split_seed = 0;
  std::vector<std::uint64_t> seeds{0};
  std::vector<double> thresholds;  // active-sampling sweep grid

  /// Builds the network for a dataset with `input_dim` features.
  nn::NetworkSpec network(int input_dim) const;
  /// TrainSpec with the network resolved.
  train::TrainSpec resolved(int input_dim) const;
};

ExperimentConfig config_from_json(const nlohmann::json& j, const std::filesystem::path& base_dir = {});
nlohmann::json to_json(const ExperimentConfig& c);
ExperimentConfig load_config(const std::filesystem::path& path);

nlohmann::json read_json_file(const std::filesystem::path& path);

}  // namespace sslseq::config
