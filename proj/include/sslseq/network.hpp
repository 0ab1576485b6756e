// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sslseq/nn.hpp"

#include <json.hpp>

#include <functional>
#include <string>
#include <vector>

namespace sslseq::nn {

struct LstmLayerSpec {
  int units = 64;
  double dropout = 0.0;
  double recurrent_dropout = 0.0;
};

enum class Head { binary_classifier, seq_decoder };

struct NetworkSpec {
  int input_dim = 0;
  std::vector<LstmLayerSpec> lstm_layers;
  bool batch_norm = true;
  int dense_hidden = 0;  // 0 drops the hidden fully-connected layer
  double dense_dropout = 0.0;
  Head head = Head::binary_classifier;

  void validate() const;
  int latent_dim() const { return lstm_layers.back().units; }

  /// Named presets: smile (3x64, rec-dropout 0.4, dropout 0.3, FC 512),
  /// tiles / crosscheck (3x32, dropout 0.3, FC 256), desk (small, for
  /// synthetic benchmarks).
  static NetworkSpec preset(const std::string& name, int input_dim);
};

nlohmann::json to_json(const NetworkSpec& spec);
NetworkSpec network_spec_from_json(const nlohmann::json& j);

using ParamVisitor = std::function<void(const std::string&, Mat&)>;
using ConstParamVisitor = std::function<void(const std::string&, const Mat&)>;

/// Stacked LSTM -> (BatchNorm) -> (Dense + ReLU + dropout) -> single logit.
struct Classifier {
  NetworkSpec spec;
  std::vector<LstmLayer> lstm;
  BatchNorm bn;
  Dense hidden;
  Dense out;

  static Classifier init(const NetworkSpec& spec, RngSeed seed);

  /// Trainable parameters in a fixed declared order.
  void for_each_param(const ParamVisitor& f);
  void for_each_param(const ConstParamVisitor& f) const;
  /// Trainable parameters followed by BatchNorm running statistics.
  void for_each_tensor(const ParamVisitor& f);
  void for_each_tensor(const ConstParamVisitor& f) const;

  Classifier zeros_like() const;
  std::vector<Mat*> param_ptrs();
  std::vector<const Mat*> param_ptrs() const;
};

struct ClassifierCache {
  Mode mode = Mode::eval;
  std::vector<LstmCache> lstm;
  Mat top;  // final-step hidden state of the top LSTM layer, B x H
  BatchNormCache bn;
  Mat bn_out;
  Mat hidden_pre;
  Mat hidden_mask;
  Mat hidden_out;
  std::size_t steps = 0;
};

struct ClassifierForward {
  Vec logits;
  ClassifierCache cache;
};

ClassifierForward classifier_forward(const Classifier& net, const Sequence& x, Mode mode, RngSeed seed);

struct ClassifierBackward {
  Classifier grads;  // only trainable entries are meaningful
  Sequence grad_x;
};

ClassifierBackward classifier_backward(const Classifier& net, const ClassifierCache& cache, const Vec& grad_logits);

/// Folds a train-mode pass's batch statistics into the running averages.
void update_running_stats(Classifier& net, const ClassifierCache& cache);

/// Encoder mirrors the classifier LSTM stack; decoder runs the reversed
/// stack on the latent repeated at every step, then a per-step projection.
struct Autoencoder {
  NetworkSpec spec;
  std::vector<LstmLayer> encoder;
  std::vector<LstmLayer> decoder;
  Dense projection;
  bool reverse_decode = false;

  static Autoencoder init(const NetworkSpec& spec, RngSeed seed);

  void for_each_param(const ParamVisitor& f);
  void for_each_param(const ConstParamVisitor& f) const;
  Autoencoder zeros_like() const;
  std::vector<Mat*> param_ptrs();
  std::vector<const Mat*> param_ptrs() const;
};

struct AutoencoderCache {
  Sequence noisy_input;
  std::vector<LstmCache> encoder;
  std::vector<LstmCache> decoder;
  Sequence decoder_top;  // per-step output of the last decoder layer
};

struct AutoencoderForward {
  Sequence reconstruction;  // T entries of B x F (time-reversed when reverse_decode)
  Mat latent;               // B x H
  AutoencoderCache cache;
};

AutoencoderForward ae_forward(const Autoencoder& ae, const Sequence& x, double noise_sigma, Mode mode, RngSeed seed);

struct AutoencoderBackward {
  Autoencoder grads;
};

AutoencoderBackward ae_backward(const Autoencoder& ae, const AutoencoderCache& cache, const Sequence& grad_recon);

/// Latent = final hidden state of the top encoder layer, eval mode, no noise.
Mat encode(const Autoencoder& ae, const Sequence& x);

/// Packs windows (each T x F) into a time-major batch.
Sequence to_sequence(const std::vector<const Mat*>& windows);
Sequence to_sequence(const std::vector<Mat>& windows);
/// Row b of every step, reassembled as a T x F window.
Mat window_of(const Sequence& seq, Eigen::Index b);

}  // namespace sslseq::nn
