// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sslseq/network.hpp"

#include <string>
#include <vector>

namespace sslseq::saliency {

struct SaliencyMap {
  Mat values;  // T x F, max-normalized to [0, 1]
  std::vector<std::string> feature_names;
  int step_minutes = 5;
  long sample_count = 0;
  bool degenerate = false;  // every gradient was zero
};

/// |d logit / d x| for each window (eval mode), one T x F matrix per window.
std::vector<Mat> sample_saliency(const nn::Classifier& net, const std::vector<const Mat*>& windows,
                                 int batch_size = 256);
Mat sample_saliency(const nn::Classifier& net, const Mat& window);

/// Mean of absolute maps, then divided by its maximum.
SaliencyMap average_saliency(const nn::Classifier& net, const std::vector<const Mat*>& windows,
                             const std::vector<std::string>& feature_names = {}, int step_minutes = 5);
SaliencyMap average_maps(const std::vector<Mat>& maps, const std::vector<std::string>& feature_names = {},
                         int step_minutes = 5);

/// Length in minutes of the longest run of trailing steps that each hold
/// at least one cell above `threshold`.
double effective_horizon(const SaliencyMap& map, double threshold = 0.5);
int effective_horizon_steps(const Mat& values, double threshold = 0.5);

}  // namespace sslseq::saliency
