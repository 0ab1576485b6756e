// SPDX-License-Identifier: Apache-2.0
#include "sslseq/active.hpp"

#include <Eigen/Cholesky>

#include <cmath>
#include <limits>
#include <numbers>
#include <numeric>
#include <stdexcept>

namespace sslseq::active {

namespace {

constexpr double kLog2Pi = 1.8378770664093454836;

struct Factor {
  Eigen::LLT<Mat> llt;
  double log_det = 0.0;
};

bool factor(const Mat& cov, Factor& f) {
  f.llt.compute(cov);
  if (f.llt.info() != Eigen::Success) return false;
  const Mat& L = f.llt.matrixLLT();
  f.log_det = 0.0;
  for (Eigen::Index i = 0; i < L.rows(); ++i) {
    if (!(L(i, i) > 0)) return false;
    f.log_det += 2.0 * std::log(L(i, i));
  }
  return std::isfinite(f.log_det);
}

// N x K matrix of log(alpha_k) + log phi_k(x_n).
Mat weighted_log_probs(const GmmModel& m, const std::vector<Factor>& fs, const Mat& x) {
  const Eigen::Index n = x.rows();
  const int h = m.dim();
  Mat out(n, m.k());
  for (int k = 0; k < m.k(); ++k) {
    Mat centered = (x.rowwise() - m.means.row(k)).transpose();  // H x N
    Mat z = fs[k].llt.matrixL().solve(centered);
    Vec maha = z.colwise().squaredNorm().transpose();
    const double lw = m.weights(k) > 0 ? std::log(m.weights(k)) : -std::numeric_limits<double>::infinity();
    out.col(k) = (-0.5 * (maha.array() + h * kLog2Pi + fs[k].log_det) + lw).matrix();
  }
  return out;
}

Vec row_logsumexp(const Mat& a) {
  Vec out(a.rows());
  for (Eigen::Index i = 0; i < a.rows(); ++i) {
    const double mx = a.row(i).maxCoeff();
    if (!std::isfinite(mx)) {
      out(i) = mx;
      continue;
    }
    out(i) = mx + std::log((a.row(i).array() - mx).exp().sum());
  }
  return out;
}

std::vector<Factor> factor_all(const GmmModel& m) {
  std::vector<Factor> fs(m.covs.size());
  for (std::size_t k = 0; k < m.covs.size(); ++k) {
    if (!factor(m.covs[k], fs[k])) {
      throw std::runtime_error("gmm: covariance " + std::to_string(k) + " is not positive definite");
    }
  }
  return fs;
}

struct EmRun {
  GmmModel model;
  bool ok = false;
};

EmRun run_em(const Mat& x, int K, Rng& rng, const GmmOptions& opt, double reg) {
  const Eigen::Index n = x.rows();
  const Eigen::Index h = x.cols();
  EmRun run;
  GmmModel& m = run.model;
  m.weights = Vec::Constant(K, 1.0 / K);
  m.means.resize(K, h);

  // Distinct random rows as initial means, data covariance for every component.
  std::vector<std::size_t> rows(static_cast<std::size_t>(n));
  std::iota(rows.begin(), rows.end(), 0);
  shuffle(rows, rng);
  for (int k = 0; k < K; ++k) m.means.row(k) = x.row(static_cast<Eigen::Index>(rows[k]));
  const Vec mu = x.colwise().mean().transpose();
  const Mat xc = x.rowwise() - mu.transpose();
  Mat pooled = (xc.transpose() * xc) / static_cast<double>(n);
  pooled.diagonal().array() += reg;
  m.covs.assign(K, pooled);

  double prev = -std::numeric_limits<double>::infinity();
  for (int it = 0; it < opt.max_iter; ++it) {
    std::vector<Factor> fs(K);
    for (int k = 0; k < K; ++k) {
      if (!factor(m.covs[k], fs[k])) return run;
    }
    Mat lp = weighted_log_probs(m, fs, x);
    Vec lse = row_logsumexp(lp);
    const double ll = lse.sum();
    if (!std::isfinite(ll)) return run;
    m.ll_trace.push_back(ll);
    m.log_likelihood = ll;
    m.iterations = it;
    if (it > 0 && std::abs(ll - prev) <= opt.tol * std::abs(prev)) {
      m.converged = true;
      break;
    }
    prev = ll;

    Mat resp = (lp.colwise() - lse).array().exp().matrix();  // N x K
    Vec nk = resp.colwise().sum().transpose();
    for (int k = 0; k < K; ++k) {
      const double w = std::max(nk(k), 10 * std::numeric_limits<double>::min());
      m.weights(k) = nk(k) / static_cast<double>(n);
      Vec mean = (resp.col(k).transpose() * x).transpose() / w;
      m.means.row(k) = mean.transpose();
      Mat d = x.rowwise() - mean.transpose();
      Mat cov = (d.array().colwise() * resp.col(k).array()).matrix().transpose() * d / w;
      cov = 0.5 * (cov + cov.transpose());
      cov.diagonal().array() += reg;
      m.covs[k] = cov;
    }
  }
  if (!m.converged) {
    // Score the final parameters so log_likelihood matches the returned model.
    std::vector<Factor> fs(K);
    for (int k = 0; k < K; ++k) {
      if (!factor(m.covs[k], fs[k])) return run;
    }
    const double ll = row_logsumexp(weighted_log_probs(m, fs, x)).sum();
    if (!std::isfinite(ll)) return run;
    m.ll_trace.push_back(ll);
    m.log_likelihood = ll;
    m.iterations = opt.max_iter;
  }
  run.ok = true;
  return run;
}

}  // namespace

void GmmModel::validate() const {
  const int K = k();
  if (K < 1 || means.rows() != K || static_cast<int>(covs.size()) != K) {
    throw DimensionError("GmmModel: inconsistent component count");
  }
  if (std::abs(weights.sum() - 1.0) > 1e-9 || (weights.array() < 0).any()) {
    throw std::invalid_argument("GmmModel: weights must lie on the simplex");
  }
  for (const auto& c : covs) {
    if (c.rows() != dim() || c.cols() != dim()) throw DimensionError("GmmModel: covariance shape");
    Factor f;
    if (!factor(c, f)) throw std::invalid_argument("GmmModel: covariance is not positive definite");
  }
}

GmmModel fit_gmm(const Mat& x, int k, RngSeed seed, const GmmOptions& opt) {
  if (k < 1) throw std::invalid_argument("fit_gmm: K must be >= 1");
  if (!x.allFinite()) throw std::invalid_argument("fit_gmm: latents contain non-finite values");
  if (x.rows() <= static_cast<Eigen::Index>(k) * x.cols()) {
    throw InsufficientDataError("fit_gmm: need N > K*H (N=" + std::to_string(x.rows()) + ", K=" +
                                std::to_string(k) + ", H=" + std::to_string(x.cols()) + ")");
  }
  GmmModel best;
  bool have = false;
  for (int r = 0; r < std::max(1, opt.restarts); ++r) {
    Rng rng(derive_seed(seed.value, 0x6a3, static_cast<std::uint64_t>(r)));
    EmRun run = run_em(x, k, rng, opt, opt.reg);
    if (!run.ok) {
      // One retry with heavier regularization before giving up on this start.
      Rng retry(derive_seed(seed.value, 0x6a4, static_cast<std::uint64_t>(r)));
      run = run_em(x, k, retry, opt, opt.reg * 1e3);
    }
    if (run.ok && (!have || run.model.log_likelihood > best.log_likelihood)) {
      best = std::move(run.model);
      have = true;
    }
  }
  if (!have) throw std::runtime_error("fit_gmm: covariance stayed singular after regularization retry");
  return best;
}

Vec log_density(const GmmModel& model, const Mat& x) {
  if (x.cols() != model.dim()) throw DimensionError("gmm: latent dimension mismatch");
  return row_logsumexp(weighted_log_probs(model, factor_all(model), x));
}

double total_log_likelihood(const GmmModel& model, const Mat& x) { return log_density(model, x).sum(); }

double nll(const GmmModel& model, const Vec& h) {
  Mat row = h.transpose();
  return -log_density(model, row)(0);
}

Vec nll(const GmmModel& model, const Mat& x) { return -log_density(model, x); }

}  // namespace sslseq::active
