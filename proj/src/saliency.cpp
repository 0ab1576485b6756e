// SPDX-License-Identifier: Apache-2.0
#include "sslseq/saliency.hpp"

#include <stdexcept>

namespace sslseq::saliency {

std::vector<Mat> sample_saliency(const nn::Classifier& net, const std::vector<const Mat*>& windows, int batch_size) {
  std::vector<Mat> out;
  out.reserve(windows.size());
  for (std::size_t lo = 0; lo < windows.size(); lo += static_cast<std::size_t>(batch_size)) {
    const std::size_t hi = std::min(windows.size(), lo + static_cast<std::size_t>(batch_size));
    std::vector<const Mat*> chunk(windows.begin() + static_cast<std::ptrdiff_t>(lo),
                                  windows.begin() + static_cast<std::ptrdiff_t>(hi));
    const auto x = nn::to_sequence(chunk);
    // Eval mode has no batch coupling, so a unit gradient per row yields per-window input gradients.
    const auto fwd = nn::classifier_forward(net, x, nn::Mode::eval, RngSeed{0});
    const auto back = nn::classifier_backward(net, fwd.cache, Vec::Ones(fwd.logits.size()));
    for (std::size_t b = 0; b < chunk.size(); ++b) {
      out.push_back(nn::window_of(back.grad_x, static_cast<Eigen::Index>(b)).cwiseAbs());
    }
  }
  return out;
}

Mat sample_saliency(const nn::Classifier& net, const Mat& window) { return sample_saliency(net, {&window}).front(); }

SaliencyMap average_maps(const std::vector<Mat>& maps, const std::vector<std::string>& feature_names,
                         int step_minutes) {
  if (maps.empty()) throw std::invalid_argument("average_saliency: need at least one window");
  SaliencyMap m;
  m.values = Mat::Zero(maps.front().rows(), maps.front().cols());
  for (const auto& s : maps) {
    if (s.rows() != m.values.rows() || s.cols() != m.values.cols()) throw DimensionError("average_saliency: shapes");
    m.values += s.cwiseAbs();
  }
  m.values /= static_cast<double>(maps.size());
  const double mx = m.values.maxCoeff();
  if (mx > 0) {
    m.values /= mx;
  } else {
    m.degenerate = true;
  }
  m.feature_names = feature_names;
  m.step_minutes = step_minutes;
  m.sample_count = static_cast<long>(maps.size());
  return m;
}

SaliencyMap average_saliency(const nn::Classifier& net, const std::vector<const Mat*>& windows,
                             const std::vector<std::string>& feature_names, int step_minutes) {
  return average_maps(sample_saliency(net, windows), feature_names, step_minutes);
}

int effective_horizon_steps(const Mat& values, double threshold) {
  int n = 0;
  for (Eigen::Index t = values.rows() - 1; t >= 0; --t) {
    if (!((values.row(t).array() > threshold).any())) break;
    ++n;
  }
  return n;
}

double effective_horizon(const SaliencyMap& map, double threshold) {
  return static_cast<double>(effective_horizon_steps(map.values, threshold)) * map.step_minutes;
}

}  // namespace sslseq::saliency
