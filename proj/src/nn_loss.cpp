// SPDX-License-Identifier: Apache-2.0
#include "sslseq/nn.hpp"

#include <algorithm>
#include <cmath>

namespace sslseq::nn {

namespace {
constexpr double kProbFloor = 1e-7;
}

double sigmoid(double z) {
  if (z >= 0) return 1.0 / (1.0 + std::exp(-z));
  const double e = std::exp(z);
  return e / (1.0 + e);
}

Vec sigmoid(const Vec& z) {
  Vec out(z.size());
  for (Eigen::Index i = 0; i < z.size(); ++i) out[i] = sigmoid(z[i]);
  return out;
}

LossGrad bce_loss(const Vec& logits, const Vec& labels) {
  if (logits.size() != labels.size() || logits.size() == 0) throw DimensionError("bce_loss: size mismatch");
  const double n = static_cast<double>(logits.size());
  LossGrad out;
  out.grad.resize(logits.size());
  for (Eigen::Index i = 0; i < logits.size(); ++i) {
    const double z = logits[i];
    const double y = labels[i];
    if (y != 0.0 && y != 1.0) throw std::invalid_argument("bce_loss: labels must be 0 or 1");
    out.loss += std::max(z, 0.0) - z * y + std::log1p(std::exp(-std::abs(z)));
    out.grad[i] = (sigmoid(z) - y) / n;
  }
  out.loss /= n;
  return out;
}

double kl_bernoulli_value(double p, double q) {
  p = std::clamp(p, kProbFloor, 1.0 - kProbFloor);
  q = std::clamp(q, kProbFloor, 1.0 - kProbFloor);
  return p * std::log(p / q) + (1.0 - p) * std::log((1.0 - p) / (1.0 - q));
}

LossGrad kl_bernoulli(const Vec& p, const Vec& q_logits) {
  if (p.size() != q_logits.size() || p.size() == 0) throw DimensionError("kl_bernoulli: size mismatch");
  const double n = static_cast<double>(p.size());
  LossGrad out;
  out.grad.resize(p.size());
  for (Eigen::Index i = 0; i < p.size(); ++i) {
    const double pc = std::clamp(p[i], kProbFloor, 1.0 - kProbFloor);
    const double q = sigmoid(q_logits[i]);
    out.loss += kl_bernoulli_value(pc, q);
    const bool clamped = q < kProbFloor || q > 1.0 - kProbFloor;
    out.grad[i] = clamped ? 0.0 : (q - pc) / n;
  }
  out.loss /= n;
  return out;
}

void adam_step(AdamState& state, const std::vector<Mat*>& params, const std::vector<const Mat*>& grads) {
  if (params.size() != grads.size()) throw DimensionError("adam_step: parameter/gradient count mismatch");
  if (state.m.empty()) {
    for (const auto* p : params) {
      state.m.push_back(Mat::Zero(p->rows(), p->cols()));
      state.v.push_back(Mat::Zero(p->rows(), p->cols()));
    }
  }
  if (state.m.size() != params.size()) throw DimensionError("adam_step: state does not match parameters");
  ++state.step;
  const double bc1 = 1.0 - std::pow(state.beta1, static_cast<double>(state.step));
  const double bc2 = 1.0 - std::pow(state.beta2, static_cast<double>(state.step));
  for (std::size_t k = 0; k < params.size(); ++k) {
    const Mat& g = *grads[k];
    if (g.rows() != params[k]->rows() || g.cols() != params[k]->cols()) {
      throw DimensionError("adam_step: gradient shape mismatch");
    }
    state.m[k] = state.beta1 * state.m[k] + (1.0 - state.beta1) * g;
    state.v[k] = state.beta2 * state.v[k] + (1.0 - state.beta2) * g.cwiseProduct(g);
    params[k]->array() -= state.learning_rate * (state.m[k].array() / bc1) /
                          ((state.v[k].array() / bc2).sqrt() + state.eps);
  }
}

}  // namespace sslseq::nn
