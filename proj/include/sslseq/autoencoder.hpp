// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sslseq/checkpoint.hpp"
#include "sslseq/network.hpp"

#include <vector>

namespace sslseq::ae {

struct AePretrainSpec {
  enum class Source { all, active_selected };

  double noise_sigma = 0.05;  // std of input noise, standardized units
  int epochs = 20;
  int batch_size = 32;
  double learning_rate = 1e-3;
  Source unlabeled_source = Source::all;
  double holdout_fraction = 0.1;
  bool reverse_decode = false;

  void validate() const;
};

/// Mean squared error over every element of the batch.
double ae_loss(const nn::Sequence& x, const nn::Sequence& x_hat);
/// Gradient of ae_loss with respect to x_hat.
nn::Sequence ae_loss_grad(const nn::Sequence& x, const nn::Sequence& x_hat);

struct LossCurvePoint {
  int epoch = 0;
  double train_mse = 0.0;
  double holdout_mse = 0.0;
};

struct PretrainResult {
  nn::Autoencoder model;
  std::vector<LossCurvePoint> curve;
  std::size_t train_count = 0;
  std::size_t holdout_count = 0;
};

class TrainingDiverged : public std::runtime_error {
 public:
  using std::runtime_error::runtime_error;
};

/// Denoising reconstruction training on standardized windows (T x F each).
PretrainResult pretrain(const std::vector<Mat>& windows, const nn::NetworkSpec& spec, const AePretrainSpec& opt,
                        RngSeed seed);

/// Mean reconstruction loss in eval mode.
double reconstruction_mse(const nn::Autoencoder& ae, const std::vector<Mat>& windows, double noise_sigma = 0.0,
                          RngSeed seed = {}, int batch_size = 256);

/// Encoder latents for every window, N x H.
Mat latents(const nn::Autoencoder& ae, const std::vector<Mat>& windows, int batch_size = 256);

/// Fresh classifier whose LSTM stack is copied bit-for-bit from the encoder.
nn::Classifier transplant(const nn::Autoencoder& ae, const nn::NetworkSpec& classifier_spec, RngSeed seed);
nn::Checkpoint transplant(const nn::Checkpoint& ae_checkpoint, const nn::NetworkSpec& classifier_spec, RngSeed seed);

}  // namespace sslseq::ae
