// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sslseq/common.hpp"

#include <string>
#include <vector>

namespace sslseq::nn {

enum class Mode { train, eval };

/// Time-major batch: entry t is the B x D slice for step t.
using Sequence = std::vector<Mat>;

Sequence zeros_like(const Sequence& s);

// ---------------------------------------------------------------- LSTM ----

/// Gate blocks are stacked in the order input, forget, candidate, output.
struct LstmLayer {
  int input_dim = 0;
  int hidden_dim = 0;
  double dropout = 0.0;            // on inputs, fresh mask per timestep
  double recurrent_dropout = 0.0;  // on h_{t-1}, one mask per sequence
  Mat W;  // 4H x D
  Mat U;  // 4H x H
  Mat b;  // 4H x 1

  /// Glorot-uniform W, orthogonal U, forget-gate bias 1.
  static LstmLayer init(int input_dim, int hidden_dim, double dropout, double recurrent_dropout, Rng& rng);
};

struct LstmCache {
  Sequence x;       // inputs after input dropout
  Sequence h_prev;  // h_{t-1} after recurrent dropout
  Sequence c;       // c_0 .. c_T (T + 1 entries)
  Sequence i, f, g, o, tanh_c;
  Sequence input_mask;  // empty when no input dropout applied
  Mat recurrent_mask;   // empty when no recurrent dropout applied
};

struct LstmOutput {
  Sequence h;
  LstmCache cache;
};

/// `rng` is consulted only in train mode with nonzero dropout.
LstmOutput lstm_forward(const LstmLayer& layer, const Sequence& x, Mode mode, Rng* rng);

struct LstmGrads {
  Mat W, U, b;
};

struct LstmBackward {
  LstmGrads grads;
  Sequence grad_x;
};

LstmBackward lstm_backward(const LstmLayer& layer, const LstmCache& cache, const Sequence& grad_h);

// ----------------------------------------------------------- BatchNorm ----

struct BatchNorm {
  Mat gamma;  // H x 1
  Mat beta;   // H x 1
  Mat running_mean;
  Mat running_var;
  double momentum = 0.99;
  double epsilon = 1e-3;

  static BatchNorm init(int features, double momentum = 0.99, double epsilon = 1e-3);
};

struct BatchNormCache {
  Mat x_hat;
  Vec inv_std;
  Vec batch_mean;
  Vec batch_var;  // biased
  Mode mode = Mode::eval;
};

/// x is B x H. Train mode needs B >= 2.
Mat batchnorm_forward(const BatchNorm& bn, const Mat& x, Mode mode, BatchNormCache& cache);

struct BatchNormGrads {
  Mat gamma, beta;
};

Mat batchnorm_backward(const BatchNorm& bn, const BatchNormCache& cache, const Mat& grad_y, BatchNormGrads& grads);

/// running = momentum * running + (1 - momentum) * batch (unbiased variance).
void batchnorm_update_running(BatchNorm& bn, const BatchNormCache& cache, int batch_size);

// --------------------------------------------------------------- Dense ----

struct Dense {
  Mat W;  // out x in
  Mat b;  // out x 1

  static Dense init(int in, int out, Rng& rng);
};

Mat dense_forward(const Dense& layer, const Mat& x);

struct DenseGrads {
  Mat W, b;
};

Mat dense_backward(const Dense& layer, const Mat& x, const Mat& grad_y, DenseGrads& grads);

Mat relu_forward(const Mat& x);
Mat relu_backward(const Mat& x, const Mat& grad_y);

/// Inverted dropout: kept units are scaled by 1/(1-rate). Returns the mask
/// (already scaled) so backward is an elementwise product.
Mat dropout_mask(Eigen::Index rows, Eigen::Index cols, double rate, Rng& rng);
Mat dropout_forward(const Mat& x, const Mat& mask);
Mat dropout_backward(const Mat& grad_y, const Mat& mask);

// -------------------------------------------------------------- Losses ----

struct LossGrad {
  double loss = 0.0;
  Vec grad;  // d loss / d logits
};

double sigmoid(double z);
Vec sigmoid(const Vec& z);

/// Mean binary cross-entropy on logits, computed as
/// max(z,0) - z*y + log1p(exp(-|z|)).
LossGrad bce_loss(const Vec& logits, const Vec& labels);

/// Mean KL(p || q) for Bernoulli p (fixed target) and q = sigmoid(q_logits);
/// both clamped to [1e-7, 1 - 1e-7]. Gradient flows into q_logits only.
LossGrad kl_bernoulli(const Vec& p, const Vec& q_logits);
double kl_bernoulli_value(double p, double q);

// ---------------------------------------------------------------- Adam ----

struct AdamState {
  double learning_rate = 1e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double eps = 1e-8;
  std::vector<Mat> m, v;
  long step = 0;
};

void adam_step(AdamState& state, const std::vector<Mat*>& params, const std::vector<const Mat*>& grads);

}  // namespace sslseq::nn
