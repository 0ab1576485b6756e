// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sslseq/common.hpp"

#include <string>
#include <vector>

namespace sslseq::active {

struct GmmModel {
  Vec weights;             // K
  Mat means;               // K x H
  std::vector<Mat> covs;   // K entries of H x H
  double log_likelihood = 0.0;
  int iterations = 0;
  bool converged = false;
  std::vector<double> ll_trace;  // log-likelihood before each M-step

  int k() const { return static_cast<int>(weights.size()); }
  int dim() const { return static_cast<int>(means.cols()); }
  void validate() const;
};

struct GmmOptions {
  int restarts = 5;
  int max_iter = 200;
  double tol = 1e-6;  // relative change in log-likelihood
  double reg = 1e-6;
};

/// EM with full covariances; best of `restarts` seeded starts.
GmmModel fit_gmm(const Mat& x, int k, RngSeed seed, const GmmOptions& opt = {});

/// Log-density of each row under the mixture.
Vec log_density(const GmmModel& model, const Mat& x);
double total_log_likelihood(const GmmModel& model, const Mat& x);

double nll(const GmmModel& model, const Vec& h);
Vec nll(const GmmModel& model, const Mat& x);

/// Free parameters of a full-covariance mixture.
long gmm_param_count(int k, int h);
double aic(double log_likelihood, long params);
double bic(double log_likelihood, long params, long n);

struct IcRow {
  int k = 0;
  long params = 0;
  double log_likelihood = 0.0;
  double aic = 0.0;
  double bic = 0.0;
};

struct KSelection {
  int k = 1;
  std::vector<IcRow> table;
};

/// Elbow on BIC: the last k before the improvement drops below `elbow_fraction`
/// of the BIC range across the table.
KSelection select_k(const Mat& x, int k_min, int k_max, RngSeed seed, const GmmOptions& opt = {},
                    double elbow_fraction = 0.02);
int elbow_from_table(const std::vector<IcRow>& table, double elbow_fraction = 0.02);

struct SelectionReport {
  double threshold = 0.0;
  std::vector<std::size_t> selected;  // row indices into the unlabeled latents, ascending
  Vec unlabeled_nll;
  Vec labeled_nll;
  double fraction_unlabeled_selected = 0.0;
  double fraction_labeled_below_threshold = 0.0;
};

SelectionReport select_unlabeled(const GmmModel& model, const Mat& labeled_latents, const Mat& unlabeled_latents,
                                 double threshold);
/// Same thresholding on precomputed scores.
SelectionReport select_by_scores(const Vec& labeled_nll, const Vec& unlabeled_nll, double threshold);

struct Projection {
  Mat points;          // N x dims
  Mat components;      // dims x H
  Vec mean;            // H
  Vec explained_variance;        // dims, sample variance along each component
  Vec explained_variance_ratio;  // dims
  double total_variance = 0.0;
};

Projection pca_project(const Mat& x, int dims = 2);
Mat pca_apply(const Projection& p, const Mat& x);

/// Where the mixture is fit: native latent space or a PCA projection.
struct GmmSpace {
  int pca_dims = 0;  // 0 = latent
  static GmmSpace parse(const std::string& text);
  std::string str() const;
};

}  // namespace sslseq::active
