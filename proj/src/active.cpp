// SPDX-License-Identifier: Apache-2.0
#include "sslseq/active.hpp"

#include <Eigen/Eigenvalues>

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace sslseq::active {

long gmm_param_count(int k, int h) {
  return static_cast<long>(k - 1) + static_cast<long>(k) * h + static_cast<long>(k) * h * (h + 1) / 2;
}

double aic(double log_likelihood, long params) { return 2.0 * static_cast<double>(params) - 2.0 * log_likelihood; }

double bic(double log_likelihood, long params, long n) {
  return static_cast<double>(params) * std::log(static_cast<double>(n)) - 2.0 * log_likelihood;
}

int elbow_from_table(const std::vector<IcRow>& table, double elbow_fraction) {
  if (table.empty()) throw std::invalid_argument("elbow_from_table: empty table");
  double lo = table.front().bic, hi = table.front().bic;
  for (const auto& r : table) {
    lo = std::min(lo, r.bic);
    hi = std::max(hi, r.bic);
  }
  const double range = hi - lo;
  if (!(range > 0)) return table.front().k;
  for (std::size_t i = 1; i < table.size(); ++i) {
    const double improvement = table[i - 1].bic - table[i].bic;
    if (improvement < elbow_fraction * range) return table[i - 1].k;
  }
  return table.back().k;
}

KSelection select_k(const Mat& x, int k_min, int k_max, RngSeed seed, const GmmOptions& opt, double elbow_fraction) {
  if (k_min < 1 || k_max < k_min) throw std::invalid_argument("select_k: invalid k range");
  KSelection out;
  for (int k = k_min; k <= k_max; ++k) {
    if (x.rows() <= static_cast<Eigen::Index>(k) * x.cols()) break;
    GmmModel m = fit_gmm(x, k, RngSeed{derive_seed(seed.value, static_cast<std::uint64_t>(k))}, opt);
    IcRow row;
    row.k = k;
    row.params = gmm_param_count(k, static_cast<int>(x.cols()));
    row.log_likelihood = m.log_likelihood;
    row.aic = aic(m.log_likelihood, row.params);
    row.bic = bic(m.log_likelihood, row.params, static_cast<long>(x.rows()));
    out.table.push_back(row);
  }
  if (out.table.empty()) {
    throw InsufficientDataError("select_k: too few latents for K=" + std::to_string(k_min));
  }
  out.k = elbow_from_table(out.table, elbow_fraction);
  return out;
}

SelectionReport select_by_scores(const Vec& labeled_nll, const Vec& unlabeled_nll, double threshold) {
  SelectionReport r;
  r.threshold = threshold;
  r.labeled_nll = labeled_nll;
  r.unlabeled_nll = unlabeled_nll;
  for (Eigen::Index i = 0; i < unlabeled_nll.size(); ++i) {
    if (unlabeled_nll(i) <= threshold) r.selected.push_back(static_cast<std::size_t>(i));
  }
  if (unlabeled_nll.size() > 0) {
    r.fraction_unlabeled_selected = static_cast<double>(r.selected.size()) / static_cast<double>(unlabeled_nll.size());
  }
  if (labeled_nll.size() > 0) {
    r.fraction_labeled_below_threshold =
        static_cast<double>((labeled_nll.array() <= threshold).count()) / static_cast<double>(labeled_nll.size());
  }
  return r;
}

SelectionReport select_unlabeled(const GmmModel& model, const Mat& labeled_latents, const Mat& unlabeled_latents,
                                 double threshold) {
  const Vec lab = labeled_latents.rows() > 0 ? nll(model, labeled_latents) : Vec();
  const Vec unl = unlabeled_latents.rows() > 0 ? nll(model, unlabeled_latents) : Vec();
  return select_by_scores(lab, unl, threshold);
}

Projection pca_project(const Mat& x, int dims) {
  if (dims < 1 || dims > x.cols()) throw std::invalid_argument("pca_project: dims out of range");
  if (x.rows() < std::max<Eigen::Index>(2, dims)) throw InsufficientDataError("pca_project: too few rows");
  Projection p;
  p.mean = x.colwise().mean().transpose();
  const Mat xc = x.rowwise() - p.mean.transpose();
  const Mat cov = (xc.transpose() * xc) / static_cast<double>(x.rows() - 1);
  Eigen::SelfAdjointEigenSolver<Mat> es(cov);
  const Vec evals = es.eigenvalues();  // ascending
  const Mat evecs = es.eigenvectors();
  const Eigen::Index h = x.cols();
  p.components.resize(dims, h);
  p.explained_variance.resize(dims);
  p.total_variance = std::max(0.0, evals.sum());
  for (int d = 0; d < dims; ++d) {
    const Eigen::Index col = h - 1 - d;
    Vec v = evecs.col(col);
    // Sign convention: largest-magnitude loading positive.
    Eigen::Index arg = 0;
    v.cwiseAbs().maxCoeff(&arg);
    if (v(arg) < 0) v = -v;
    p.components.row(d) = v.transpose();
    p.explained_variance(d) = std::max(0.0, evals(col));
  }
  p.explained_variance_ratio =
      p.total_variance > 0 ? Vec(p.explained_variance / p.total_variance) : Vec(Vec::Zero(dims));
  p.points = xc * p.components.transpose();
  return p;
}

Mat pca_apply(const Projection& p, const Mat& x) {
  if (x.cols() != p.mean.size()) throw DimensionError("pca_apply: dimension mismatch");
  return (x.rowwise() - p.mean.transpose()) * p.components.transpose();
}

GmmSpace GmmSpace::parse(const std::string& text) {
  GmmSpace s;
  if (text == "latent") return s;
  if (text.rfind("pca:", 0) == 0) {
    std::size_t used = 0;
    const int d = std::stoi(text.substr(4), &used);
    if (used + 4 != text.size() || d < 1) throw std::invalid_argument("gmm space: bad pca dims in '" + text + "'");
    s.pca_dims = d;
    return s;
  }
  throw std::invalid_argument("gmm space must be 'latent' or 'pca:<d>', got '" + text + "'");
}

std::string GmmSpace::str() const { return pca_dims == 0 ? "latent" : "pca:" + std::to_string(pca_dims); }

}  // namespace sslseq::active
