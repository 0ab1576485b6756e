// SPDX-License-Identifier: Apache-2.0
#include "sslseq/autoencoder.hpp"

#include <cmath>
#include <numeric>
#include <utility>
#include <sstream>

namespace sslseq::ae {

void AePretrainSpec::validate() const {
  if (noise_sigma < 0) throw std::invalid_argument("AePretrainSpec: noise_sigma must be >= 0");
  if (epochs < 1 || batch_size < 1) throw std::invalid_argument("AePretrainSpec: epochs and batch_size must be >= 1");
  if (learning_rate <= 0) throw std::invalid_argument("AePretrainSpec: learning_rate must be > 0");
  if (holdout_fraction < 0 || holdout_fraction >= 1) throw std::invalid_argument("AePretrainSpec: holdout in [0,1)");
}

double ae_loss(const nn::Sequence& x, const nn::Sequence& x_hat) {
  if (x.size() != x_hat.size() || x.empty()) throw DimensionError("ae_loss: sequence length mismatch");
  double sum = 0.0;
  double count = 0.0;
  for (std::size_t t = 0; t < x.size(); ++t) {
    if (x[t].rows() != x_hat[t].rows() || x[t].cols() != x_hat[t].cols()) throw DimensionError("ae_loss: shape mismatch");
    sum += (x[t] - x_hat[t]).squaredNorm();
    count += static_cast<double>(x[t].size());
  }
  return sum / count;
}

nn::Sequence ae_loss_grad(const nn::Sequence& x, const nn::Sequence& x_hat) {
  double count = 0.0;
  for (const auto& m : x) count += static_cast<double>(m.size());
  nn::Sequence g(x.size());
  for (std::size_t t = 0; t < x.size(); ++t) g[t] = (x_hat[t] - x[t]) * (2.0 / count);
  return g;
}

namespace {

std::vector<const Mat*> gather(const std::vector<Mat>& windows, const std::vector<std::size_t>& idx, std::size_t lo,
                               std::size_t hi) {
  std::vector<const Mat*> out;
  for (std::size_t k = lo; k < hi; ++k) out.push_back(&windows[idx[k]]);
  return out;
}

}  // namespace

double reconstruction_mse(const nn::Autoencoder& ae, const std::vector<Mat>& windows, double noise_sigma, RngSeed seed,
                          int batch_size) {
  if (windows.empty()) return 0.0;
  std::vector<std::size_t> idx(windows.size());
  std::iota(idx.begin(), idx.end(), 0);
  double sum = 0.0, count = 0.0;
  for (std::size_t lo = 0; lo < idx.size(); lo += batch_size) {
    const std::size_t hi = std::min(idx.size(), lo + batch_size);
    auto x = nn::to_sequence(gather(windows, idx, lo, hi));
    auto fwd = nn::ae_forward(ae, x, noise_sigma, nn::Mode::eval, RngSeed{derive_seed(seed.value, lo)});
    const double elems = static_cast<double>(x.size() * x.front().size());
    sum += ae_loss(x, fwd.reconstruction) * elems;
    count += elems;
  }
  return sum / count;
}

PretrainResult pretrain(const std::vector<Mat>& windows, const nn::NetworkSpec& spec, const AePretrainSpec& opt,
                        RngSeed seed) {
  opt.validate();
  if (windows.size() < 2) throw std::invalid_argument("pretrain: need at least 2 windows");
  PretrainResult result;
  result.model = nn::Autoencoder::init(spec, RngSeed{derive_seed(seed.value, 1)});
  result.model.reverse_decode = opt.reverse_decode;

  std::vector<std::size_t> order(windows.size());
  std::iota(order.begin(), order.end(), 0);
  Rng split_rng(derive_seed(seed.value, 2));
  shuffle(order, split_rng);
  std::size_t n_hold = static_cast<std::size_t>(std::floor(opt.holdout_fraction * static_cast<double>(windows.size())));
  if (opt.holdout_fraction > 0 && n_hold == 0) n_hold = 1;
  std::vector<Mat> holdout;
  for (std::size_t k = 0; k < n_hold; ++k) holdout.push_back(windows[order[k]]);
  std::vector<std::size_t> train(order.begin() + static_cast<std::ptrdiff_t>(n_hold), order.end());
  result.train_count = train.size();
  result.holdout_count = holdout.size();

  nn::AdamState adam;
  adam.learning_rate = opt.learning_rate;
  Rng rng(derive_seed(seed.value, 3));
  const std::size_t bs = static_cast<std::size_t>(opt.batch_size);
  long step = 0;
  for (int epoch = 1; epoch <= opt.epochs; ++epoch) {
    shuffle(train, rng);
    double sum = 0.0, count = 0.0;
    for (std::size_t lo = 0; lo < train.size(); lo += bs) {
      const std::size_t hi = std::min(train.size(), lo + bs);
      auto x = nn::to_sequence(gather(windows, train, lo, hi));
      auto fwd = nn::ae_forward(result.model, x, opt.noise_sigma, nn::Mode::train,
                                RngSeed{derive_seed(seed.value, 4, static_cast<std::uint64_t>(step))});
      const double loss = ae_loss(x, fwd.reconstruction);
      if (!std::isfinite(loss)) {
        std::ostringstream msg;
        msg << "pretrain: reconstruction loss became " << loss << " at epoch " << epoch << ", step " << step
            << " (learning rate " << opt.learning_rate << "); lower the learning rate or check input scaling";
        throw TrainingDiverged(msg.str());
      }
      auto back = nn::ae_backward(result.model, fwd.cache, ae_loss_grad(x, fwd.reconstruction));
      nn::adam_step(adam, result.model.param_ptrs(), std::as_const(back.grads).param_ptrs());
      const double elems = static_cast<double>(hi - lo);
      sum += loss * elems;
      count += elems;
      ++step;
    }
    LossCurvePoint p;
    p.epoch = epoch;
    p.train_mse = sum / count;
    p.holdout_mse = holdout.empty() ? 0.0 : reconstruction_mse(result.model, holdout);
    result.curve.push_back(p);
  }
  return result;
}

Mat latents(const nn::Autoencoder& ae, const std::vector<Mat>& windows, int batch_size) {
  Mat out(static_cast<Eigen::Index>(windows.size()), ae.spec.latent_dim());
  std::vector<std::size_t> idx(windows.size());
  std::iota(idx.begin(), idx.end(), 0);
  for (std::size_t lo = 0; lo < windows.size(); lo += batch_size) {
    const std::size_t hi = std::min(windows.size(), lo + static_cast<std::size_t>(batch_size));
    auto h = nn::encode(ae, nn::to_sequence(gather(windows, idx, lo, hi)));
    out.middleRows(static_cast<Eigen::Index>(lo), static_cast<Eigen::Index>(hi - lo)) = h;
  }
  return out;
}

nn::Classifier transplant(const nn::Autoencoder& ae, const nn::NetworkSpec& classifier_spec, RngSeed seed) {
  nn::Classifier net = nn::Classifier::init(classifier_spec, seed);
  if (net.lstm.size() != ae.encoder.size()) {
    throw DimensionError("transplant: classifier has " + std::to_string(net.lstm.size()) +
                         " LSTM layers, encoder has " + std::to_string(ae.encoder.size()));
  }
  for (std::size_t k = 0; k < net.lstm.size(); ++k) {
    const auto& src = ae.encoder[k];
    auto& dst = net.lstm[k];
    if (src.input_dim != dst.input_dim || src.hidden_dim != dst.hidden_dim) {
      throw DimensionError("transplant: layer lstm." + std::to_string(k) + " shape mismatch (encoder " +
                           std::to_string(src.input_dim) + "->" + std::to_string(src.hidden_dim) + ", classifier " +
                           std::to_string(dst.input_dim) + "->" + std::to_string(dst.hidden_dim) + ")");
    }
    dst.W = src.W;
    dst.U = src.U;
    dst.b = src.b;
  }
  return net;
}

nn::Checkpoint transplant(const nn::Checkpoint& ae_checkpoint, const nn::NetworkSpec& classifier_spec, RngSeed seed) {
  return nn::to_checkpoint(transplant(nn::autoencoder_from_checkpoint(ae_checkpoint), classifier_spec, seed),
                           seed.value);
}

}  // namespace sslseq::ae
