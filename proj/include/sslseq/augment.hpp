// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sslseq/common.hpp"
#include "sslseq/data.hpp"

#include <optional>
#include <string>
#include <vector>

namespace sslseq::augment {

enum class Op { jitter, scale, time_warp, magnitude_warp };

std::string to_string(Op op);
Op parse_op(const std::string& text);

struct NormalDist {
  double mean = 1.0;
  double stddev = 0.05;
};

enum class ScalePer { feature, window };

struct AugmentationSpec {
  std::vector<Op> ops{Op::jitter, Op::scale, Op::time_warp, Op::magnitude_warp};
  double jitter_sigma = 0.03;  // in units of the per-feature scale
  NormalDist scale_dist{1.0, 0.05};
  NormalDist mw_dist{1.0, 0.05};
  int mw_knots = 4;
  int tw_knots = 4;
  double tw_sigma = 0.2;
  int copies = 10;  // M
  ScalePer scale_per = ScalePer::feature;
  /// Per-feature std used by jitter; empty means unit scale (standardized data).
  std::vector<double> feature_std;

  void validate() const;
};

/// output = input + eps, eps_tf ~ N(0, sigma * std_f).
Mat jitter(const Mat& window, double sigma, RngSeed seed, const std::vector<double>& feature_std = {});

Mat scale(const Mat& window, NormalDist dist, RngSeed seed, ScalePer per = ScalePer::feature);

/// Smooth multiplicative curve per feature: natural cubic spline through
/// `knots` equally spaced draws from `dist`.
Mat magnitude_warp(const Mat& window, NormalDist dist, int knots, RngSeed seed);
Mat magnitude_warp_curve(int steps, NormalDist dist, int knots, Rng& rng);

/// Monotone warp tau with tau(0)=0, tau(T-1)=T-1, shared by all features.
std::vector<double> time_warp_path(int steps, int knots, double sigma, Rng& rng);
Mat time_warp(const Mat& window, int knots, double sigma, RngSeed seed);

/// Applies spec.ops in order with fresh randomness for each operator.
Mat apply(const Mat& window, const AugmentationSpec& spec, RngSeed seed);

/// M augmented copies per window; copy c of window i uses
/// derive_seed(seed, window_id[i], c). Labels carry through untouched.
std::vector<std::vector<data::SequenceWindow>> augment_batch(const std::vector<data::SequenceWindow>& windows,
                                                             const AugmentationSpec& spec, RngSeed seed,
                                                             const std::vector<std::uint64_t>& window_ids = {});

}  // namespace sslseq::augment
