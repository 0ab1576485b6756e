// SPDX-License-Identifier: Apache-2.0
#include "sslseq/nn.hpp"

#include <cmath>

namespace sslseq::nn {

BatchNorm BatchNorm::init(int features, double momentum, double epsilon) {
  if (epsilon <= 0) throw std::invalid_argument("BatchNorm: epsilon must be > 0");
  BatchNorm bn;
  bn.gamma = Mat::Ones(features, 1);
  bn.beta = Mat::Zero(features, 1);
  bn.running_mean = Mat::Zero(features, 1);
  bn.running_var = Mat::Ones(features, 1);
  bn.momentum = momentum;
  bn.epsilon = epsilon;
  return bn;
}

Mat batchnorm_forward(const BatchNorm& bn, const Mat& x, Mode mode, BatchNormCache& cache) {
  if (x.cols() != bn.gamma.rows()) throw DimensionError("batchnorm_forward: feature count mismatch");
  const Eigen::Index batch = x.rows();
  cache.mode = mode;
  if (mode == Mode::train) {
    if (batch < 2) throw std::invalid_argument("batchnorm_forward: train mode needs a batch of at least 2");
    cache.batch_mean = x.colwise().mean().transpose();
    const Mat centered = x.rowwise() - cache.batch_mean.transpose();
    cache.batch_var = centered.array().square().colwise().sum().transpose() / static_cast<double>(batch);
    cache.inv_std = (cache.batch_var.array() + bn.epsilon).rsqrt();
    cache.x_hat = centered.array().rowwise() * cache.inv_std.transpose().array();
  } else {
    cache.inv_std = (bn.running_var.col(0).array() + bn.epsilon).rsqrt();
    const Mat centered = x.rowwise() - bn.running_mean.col(0).transpose();
    cache.x_hat = centered.array().rowwise() * cache.inv_std.transpose().array();
  }
  Mat y = cache.x_hat.array().rowwise() * bn.gamma.col(0).transpose().array();
  y.rowwise() += bn.beta.col(0).transpose();
  return y;
}

Mat batchnorm_backward(const BatchNorm& bn, const BatchNormCache& cache, const Mat& grad_y, BatchNormGrads& grads) {
  grads.gamma = (grad_y.cwiseProduct(cache.x_hat)).colwise().sum().transpose();
  grads.beta = grad_y.colwise().sum().transpose();
  const Mat dxhat = grad_y.array().rowwise() * bn.gamma.col(0).transpose().array();
  if (cache.mode == Mode::eval) {
    return dxhat.array().rowwise() * cache.inv_std.transpose().array();
  }
  const double n = static_cast<double>(grad_y.rows());
  const Eigen::RowVectorXd sum_d = dxhat.colwise().sum();
  const Eigen::RowVectorXd sum_dx = dxhat.cwiseProduct(cache.x_hat).colwise().sum();
  Mat dx = (n * dxhat).rowwise() - sum_d;
  dx -= (cache.x_hat.array().rowwise() * sum_dx.array()).matrix();
  return (dx.array().rowwise() * (cache.inv_std.transpose().array() / n)).matrix();
}

void batchnorm_update_running(BatchNorm& bn, const BatchNormCache& cache, int batch_size) {
  if (cache.mode != Mode::train) return;
  const double n = batch_size;
  const Vec unbiased = cache.batch_var * (n / (n - 1.0));
  bn.running_mean = bn.momentum * bn.running_mean + (1.0 - bn.momentum) * Mat(cache.batch_mean);
  bn.running_var = bn.momentum * bn.running_var + (1.0 - bn.momentum) * Mat(unbiased);
}

Dense Dense::init(int in, int out, Rng& rng) {
  if (in < 1 || out < 1) throw DimensionError("Dense: dimensions must be >= 1");
  Dense d;
  const double limit = std::sqrt(6.0 / (in + out));
  d.W.resize(out, in);
  for (Eigen::Index k = 0; k < d.W.size(); ++k) d.W.data()[k] = rng.uniform(-limit, limit);
  d.b = Mat::Zero(out, 1);
  return d;
}

Mat dense_forward(const Dense& layer, const Mat& x) {
  if (x.cols() != layer.W.cols()) throw DimensionError("dense_forward: input width mismatch");
  Mat y = x * layer.W.transpose();
  y.rowwise() += layer.b.col(0).transpose();
  return y;
}

Mat dense_backward(const Dense& layer, const Mat& x, const Mat& grad_y, DenseGrads& grads) {
  grads.W = grad_y.transpose() * x;
  grads.b = grad_y.colwise().sum().transpose();
  return grad_y * layer.W;
}

Mat relu_forward(const Mat& x) { return x.cwiseMax(0.0); }

Mat relu_backward(const Mat& x, const Mat& grad_y) {
  return (x.array() > 0.0).select(grad_y, 0.0);
}

Mat dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng) {
  Mat mask(rows, cols);
  const double keep = 1.0 - rate;
  for (Eigen::Index k = 0; k < mask.size(); ++k) mask.data()[k] = rng.uniform() < keep ? 1.0 / keep : 0.0;
  return mask;
}

Mat dropout_forward(const Mat& x, const Mat& mask) { return x.cwiseProduct(mask); }

Mat dropout_backward(const Mat& grad_y, const Mat& mask) { return grad_y.cwiseProduct(mask); }

}  // namespace sslseq::nn
