// SPDX-License-Identifier: Apache-2.0
#include "sslseq/augment.hpp"

#include "sslseq/signal.hpp"

#include <cmath>

namespace sslseq::augment {

std::string to_string(Op op) {
  switch (op) {
    case Op::jitter: return "jitter";
    case Op::scale: return "scale";
    case Op::time_warp: return "time_warp";
    case Op::magnitude_warp: return "magnitude_warp";
  }
  return "?";
}

Op parse_op(const std::string& text) {
  for (Op op : {Op::jitter, Op::scale, Op::time_warp, Op::magnitude_warp}) {
    if (to_string(op) == text) return op;
  }
  throw std::invalid_argument("unknown augmentation op '" + text + "'");
}

void AugmentationSpec::validate() const {
  if (copies < 1) throw std::invalid_argument("augmentation: M must be >= 1");
  if (jitter_sigma < 0 || scale_dist.stddev < 0 || mw_dist.stddev < 0 || tw_sigma < 0) {
    throw std::invalid_argument("augmentation: sigmas must be >= 0");
  }
  if (mw_knots < 2 || tw_knots < 2) throw std::invalid_argument("augmentation: knots must be >= 2");
}

namespace {

std::vector<double> knot_positions(int steps, int knots) {
  std::vector<double> x(knots);
  for (int k = 0; k < knots; ++k) x[k] = static_cast<double>(steps - 1) * k / (knots - 1);
  return x;
}

void check_steps(const Mat& window) {
  if (window.rows() < 2) throw std::invalid_argument("warp augmentation needs T >= 2");
}

}  // namespace

Mat jitter(const Mat& window, double sigma, RngSeed seed, const std::vector<double>& feature_std) {
  if (sigma < 0) throw std::invalid_argument("jitter: sigma must be >= 0");
  if (!feature_std.empty() && static_cast<Eigen::Index>(feature_std.size()) != window.cols()) {
    throw DimensionError("jitter: feature_std size does not match feature count");
  }
  Mat out = window;
  if (sigma == 0.0) return out;
  Rng rng(seed.value);
  for (Eigen::Index f = 0; f < window.cols(); ++f) {
    const double sd = sigma * (feature_std.empty() ? 1.0 : feature_std[f]);
    for (Eigen::Index t = 0; t < window.rows(); ++t) out(t, f) += rng.normal(0.0, sd);
  }
  return out;
}

Mat scale(const Mat& window, NormalDist dist, RngSeed seed, ScalePer per) {
  Rng rng(seed.value);
  Mat out = window;
  if (per == ScalePer::window) {
    out *= rng.normal(dist.mean, dist.stddev);
    return out;
  }
  for (Eigen::Index f = 0; f < window.cols(); ++f) out.col(f) *= rng.normal(dist.mean, dist.stddev);
  return out;
}

Mat magnitude_warp_curve(int steps, NormalDist dist, int knots, Rng& rng) {
  if (knots < 2) throw std::invalid_argument("magnitude_warp: knots must be >= 2");
  std::vector<double> y(knots);
  for (auto& v : y) v = rng.normal(dist.mean, dist.stddev);
  signal::CubicSpline spline(knot_positions(steps, knots), y);
  Mat curve(steps, 1);
  for (int t = 0; t < steps; ++t) curve(t, 0) = spline(t);
  return curve;
}

Mat magnitude_warp(const Mat& window, NormalDist dist, int knots, RngSeed seed) {
  check_steps(window);
  Rng rng(seed.value);
  Mat out = window;
  if (dist.stddev == 0.0 && dist.mean == 1.0) return out;
  for (Eigen::Index f = 0; f < window.cols(); ++f) {
    out.col(f).array() *= magnitude_warp_curve(static_cast<int>(window.rows()), dist, knots, rng).col(0).array();
  }
  return out;
}

std::vector<double> time_warp_path(int steps, int knots, double sigma, Rng& rng) {
  if (knots < 2) throw std::invalid_argument("time_warp: knots must be >= 2");
  std::vector<double> tau(steps);
  for (int t = 0; t < steps; ++t) tau[t] = t;
  if (sigma == 0.0 || steps < 2) return tau;
  std::vector<double> speed_knots(knots);
  for (auto& v : speed_knots) {
    do {
      v = rng.normal(1.0, sigma);
    } while (v <= 0.0);
  }
  signal::CubicSpline speed(knot_positions(steps, knots), speed_knots);
  constexpr double kMinSpeed = 1e-3;
  std::vector<double> s(steps);
  for (int t = 0; t < steps; ++t) s[t] = std::max(kMinSpeed, speed(t));
  double acc = 0.0;
  tau[0] = 0.0;
  for (int t = 1; t < steps; ++t) {
    acc += 0.5 * (s[t - 1] + s[t]);
    tau[t] = acc;
  }
  const double norm = static_cast<double>(steps - 1) / acc;
  for (auto& v : tau) v *= norm;
  tau[steps - 1] = steps - 1;
  return tau;
}

Mat time_warp(const Mat& window, int knots, double sigma, RngSeed seed) {
  check_steps(window);
  Rng rng(seed.value);
  const int steps = static_cast<int>(window.rows());
  const auto tau = time_warp_path(steps, knots, sigma, rng);
  Mat out(window.rows(), window.cols());
  for (int t = 0; t < steps; ++t) {
    const double pos = std::clamp(tau[t], 0.0, static_cast<double>(steps - 1));
    const int i = std::min(static_cast<int>(std::floor(pos)), steps - 2);
    const double frac = pos - i;
    out.row(t) = window.row(i) * (1.0 - frac) + window.row(i + 1) * frac;
  }
  return out;
}

Mat apply(const Mat& window, const AugmentationSpec& spec, RngSeed seed) {
  Mat x = window;
  for (std::size_t k = 0; k < spec.ops.size(); ++k) {
    const RngSeed s{derive_seed(seed.value, 0xa06, k)};
    switch (spec.ops[k]) {
      case Op::jitter: x = jitter(x, spec.jitter_sigma, s, spec.feature_std); break;
      case Op::scale: x = scale(x, spec.scale_dist, s, spec.scale_per); break;
      case Op::time_warp: x = time_warp(x, spec.tw_knots, spec.tw_sigma, s); break;
      case Op::magnitude_warp: x = magnitude_warp(x, spec.mw_dist, spec.mw_knots, s); break;
    }
  }
  return x;
}

std::vector<std::vector<data::SequenceWindow>> augment_batch(const std::vector<data::SequenceWindow>& windows,
                                                             const AugmentationSpec& spec, RngSeed seed,
                                                             const std::vector<std::uint64_t>& window_ids) {
  spec.validate();
  if (!window_ids.empty() && window_ids.size() != windows.size()) {
    throw std::invalid_argument("augment_batch: window_ids size mismatch");
  }
  std::vector<std::vector<data::SequenceWindow>> out(windows.size());
  for (std::size_t i = 0; i < windows.size(); ++i) {
    const std::uint64_t id = window_ids.empty() ? i : window_ids[i];
    out[i].reserve(spec.copies);
    for (int c = 0; c < spec.copies; ++c) {
      data::SequenceWindow copy = windows[i];
      copy.features = apply(windows[i].features, spec, RngSeed{derive_seed(seed.value, id, c)});
      out[i].push_back(std::move(copy));
    }
  }
  return out;
}

}  // namespace sslseq::augment
