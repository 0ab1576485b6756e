// SPDX-License-Identifier: Apache-2.0
#include "sslseq/network.hpp"

#include <algorithm>

namespace sslseq::nn {

void NetworkSpec::validate() const {
  if (input_dim < 1) throw DimensionError("NetworkSpec: input_dim must be >= 1");
  if (lstm_layers.empty()) throw std::invalid_argument("NetworkSpec: at least one LSTM layer is required");
  for (const auto& l : lstm_layers) {
    if (l.units < 1) throw DimensionError("NetworkSpec: LSTM units must be >= 1");
    if (l.dropout < 0 || l.dropout >= 1 || l.recurrent_dropout < 0 || l.recurrent_dropout >= 1) {
      throw std::invalid_argument("NetworkSpec: dropout rates must lie in [0, 1)");
    }
  }
  if (dense_hidden < 0) throw DimensionError("NetworkSpec: dense_hidden must be >= 0");
  if (dense_dropout < 0 || dense_dropout >= 1) throw std::invalid_argument("NetworkSpec: dense_dropout in [0, 1)");
}

NetworkSpec NetworkSpec::preset(const std::string& name, int input_dim) {
  NetworkSpec s;
  s.input_dim = input_dim;
  if (name == "smile") {
    s.lstm_layers.assign(3, {64, 0.3, 0.4});
    s.dense_hidden = 512;
    s.dense_dropout = 0.5;
  } else if (name == "tiles" || name == "crosscheck") {
    s.lstm_layers.assign(3, {32, 0.3, 0.0});
    s.dense_hidden = 256;
    s.dense_dropout = 0.5;
  } else if (name == "desk") {
    s.lstm_layers.assign(1, {16, 0.1, 0.0});
    s.dense_hidden = 16;
    s.dense_dropout = 0.2;
  } else {
    throw std::invalid_argument("unknown network preset '" + name + "'");
  }
  return s;
}

nlohmann::json to_json(const NetworkSpec& spec) {
  nlohmann::json j;
  j["input_dim"] = spec.input_dim;
  j["lstm_layers"] = nlohmann::json::array();
  for (const auto& l : spec.lstm_layers) {
    j["lstm_layers"].push_back({{"units", l.units}, {"dropout", l.dropout}, {"recurrent_dropout", l.recurrent_dropout}});
  }
  j["batch_norm"] = spec.batch_norm;
  j["dense_hidden"] = spec.dense_hidden;
  j["dense_dropout"] = spec.dense_dropout;
  j["head"] = spec.head == Head::binary_classifier ? "binary_classifier" : "seq_decoder";
  return j;
}

NetworkSpec network_spec_from_json(const nlohmann::json& j) {
  NetworkSpec s;
  s.input_dim = j.at("input_dim").get<int>();
  for (const auto& l : j.at("lstm_layers")) {
    s.lstm_layers.push_back({l.at("units").get<int>(), l.value("dropout", 0.0), l.value("recurrent_dropout", 0.0)});
  }
  s.batch_norm = j.value("batch_norm", true);
  s.dense_hidden = j.value("dense_hidden", 0);
  s.dense_dropout = j.value("dense_dropout", 0.0);
  s.head = j.value("head", std::string("binary_classifier")) == "seq_decoder" ? Head::seq_decoder
                                                                              : Head::binary_classifier;
  s.validate();
  return s;
}

// ----------------------------------------------------------- Classifier ----

Classifier Classifier::init(const NetworkSpec& spec, RngSeed seed) {
  spec.validate();
  Rng rng(derive_seed(seed.value, 0xc1a55));
  Classifier net;
  net.spec = spec;
  int d = spec.input_dim;
  for (const auto& l : spec.lstm_layers) {
    net.lstm.push_back(LstmLayer::init(d, l.units, l.dropout, l.recurrent_dropout, rng));
    d = l.units;
  }
  net.bn = BatchNorm::init(d);
  if (spec.dense_hidden > 0) {
    net.hidden = Dense::init(d, spec.dense_hidden, rng);
    d = spec.dense_hidden;
  }
  net.out = Dense::init(d, 1, rng);
  return net;
}

void Classifier::for_each_param(const ParamVisitor& f) {
  for (std::size_t k = 0; k < lstm.size(); ++k) {
    const std::string p = "lstm." + std::to_string(k) + ".";
    f(p + "W", lstm[k].W);
    f(p + "U", lstm[k].U);
    f(p + "b", lstm[k].b);
  }
  if (spec.batch_norm) {
    f("bn.gamma", bn.gamma);
    f("bn.beta", bn.beta);
  }
  if (spec.dense_hidden > 0) {
    f("hidden.W", hidden.W);
    f("hidden.b", hidden.b);
  }
  f("out.W", out.W);
  f("out.b", out.b);
}

void Classifier::for_each_param(const ConstParamVisitor& f) const {
  const_cast<Classifier*>(this)->for_each_param([&](const std::string& n, Mat& m) { f(n, m); });
}

void Classifier::for_each_tensor(const ParamVisitor& f) {
  for_each_param(f);
  if (spec.batch_norm) {
    f("bn.running_mean", bn.running_mean);
    f("bn.running_var", bn.running_var);
  }
}

void Classifier::for_each_tensor(const ConstParamVisitor& f) const {
  const_cast<Classifier*>(this)->for_each_tensor([&](const std::string& n, Mat& m) { f(n, m); });
}

Classifier Classifier::zeros_like() const {
  Classifier z = *this;
  z.for_each_tensor([](const std::string&, Mat& m) { m.setZero(); });
  return z;
}

std::vector<Mat*> Classifier::param_ptrs() {
  std::vector<Mat*> out;
  for_each_param([&](const std::string&, Mat& m) { out.push_back(&m); });
  return out;
}

std::vector<const Mat*> Classifier::param_ptrs() const {
  std::vector<const Mat*> out;
  for_each_param([&](const std::string&, const Mat& m) { out.push_back(&m); });
  return out;
}

ClassifierForward classifier_forward(const Classifier& net, const Sequence& x, Mode mode, RngSeed seed) {
  if (x.empty()) throw DimensionError("classifier_forward: empty sequence");
  if (x.front().cols() != net.spec.input_dim) {
    throw DimensionError("classifier_forward: expected " + std::to_string(net.spec.input_dim) + " features, got " +
                         std::to_string(x.front().cols()));
  }
  ClassifierForward out;
  auto& c = out.cache;
  c.mode = mode;
  c.steps = x.size();
  const Sequence* in = &x;
  Sequence h;
  for (std::size_t k = 0; k < net.lstm.size(); ++k) {
    Rng rng(derive_seed(seed.value, 100 + k));
    auto res = lstm_forward(net.lstm[k], *in, mode, &rng);
    h = std::move(res.h);
    c.lstm.push_back(std::move(res.cache));
    in = &h;
  }
  c.top = h.back();
  Mat z = net.spec.batch_norm ? batchnorm_forward(net.bn, c.top, mode, c.bn) : c.top;
  c.bn_out = z;
  if (net.spec.dense_hidden > 0) {
    c.hidden_pre = dense_forward(net.hidden, z);
    Mat a = relu_forward(c.hidden_pre);
    if (mode == Mode::train && net.spec.dense_dropout > 0) {
      Rng rng(derive_seed(seed.value, 200));
      c.hidden_mask = dropout_mask(a.rows(), a.cols(), net.spec.dense_dropout, rng);
      a = dropout_forward(a, c.hidden_mask);
    }
    c.hidden_out = a;
    z = a;
  }
  out.logits = dense_forward(net.out, z).col(0);
  return out;
}

ClassifierBackward classifier_backward(const Classifier& net, const ClassifierCache& cache, const Vec& grad_logits) {
  ClassifierBackward out;
  out.grads = net.zeros_like();
  const Mat g = grad_logits;
  const Mat& head_in = net.spec.dense_hidden > 0 ? cache.hidden_out : cache.bn_out;
  DenseGrads dg;
  Mat dz = dense_backward(net.out, head_in, g, dg);
  out.grads.out.W = dg.W;
  out.grads.out.b = dg.b;
  if (net.spec.dense_hidden > 0) {
    if (cache.hidden_mask.size() > 0) dz = dropout_backward(dz, cache.hidden_mask);
    dz = relu_backward(cache.hidden_pre, dz);
    dz = dense_backward(net.hidden, cache.bn_out, dz, dg);
    out.grads.hidden.W = dg.W;
    out.grads.hidden.b = dg.b;
  }
  if (net.spec.batch_norm) {
    BatchNormGrads bg;
    dz = batchnorm_backward(net.bn, cache.bn, dz, bg);
    out.grads.bn.gamma = bg.gamma;
    out.grads.bn.beta = bg.beta;
  }
  const std::size_t steps = cache.steps;
  Sequence grad_h(steps);
  for (std::size_t t = 0; t + 1 < steps; ++t) grad_h[t] = Mat::Zero(dz.rows(), dz.cols());
  grad_h[steps - 1] = dz;
  for (std::size_t k = net.lstm.size(); k-- > 0;) {
    auto back = lstm_backward(net.lstm[k], cache.lstm[k], grad_h);
    out.grads.lstm[k].W = std::move(back.grads.W);
    out.grads.lstm[k].U = std::move(back.grads.U);
    out.grads.lstm[k].b = std::move(back.grads.b);
    grad_h = std::move(back.grad_x);
  }
  out.grad_x = std::move(grad_h);
  return out;
}

void update_running_stats(Classifier& net, const ClassifierCache& cache) {
  if (net.spec.batch_norm && cache.mode == Mode::train) {
    batchnorm_update_running(net.bn, cache.bn, static_cast<int>(cache.top.rows()));
  }
}

// ---------------------------------------------------------- Autoencoder ----

Autoencoder Autoencoder::init(const NetworkSpec& spec, RngSeed seed) {
  spec.validate();
  Rng rng(derive_seed(seed.value, 0xae));
  Autoencoder ae;
  ae.spec = spec;
  int d = spec.input_dim;
  for (const auto& l : spec.lstm_layers) {
    ae.encoder.push_back(LstmLayer::init(d, l.units, l.dropout, l.recurrent_dropout, rng));
    d = l.units;
  }
  for (std::size_t k = spec.lstm_layers.size(); k-- > 0;) {
    const auto& l = spec.lstm_layers[k];
    ae.decoder.push_back(LstmLayer::init(d, l.units, l.dropout, l.recurrent_dropout, rng));
    d = l.units;
  }
  ae.projection = Dense::init(d, spec.input_dim, rng);
  return ae;
}

void Autoencoder::for_each_param(const ParamVisitor& f) {
  for (std::size_t k = 0; k < encoder.size(); ++k) {
    const std::string p = "encoder." + std::to_string(k) + ".";
    f(p + "W", encoder[k].W);
    f(p + "U", encoder[k].U);
    f(p + "b", encoder[k].b);
  }
  for (std::size_t k = 0; k < decoder.size(); ++k) {
    const std::string p = "decoder." + std::to_string(k) + ".";
    f(p + "W", decoder[k].W);
    f(p + "U", decoder[k].U);
    f(p + "b", decoder[k].b);
  }
  f("projection.W", projection.W);
  f("projection.b", projection.b);
}

void Autoencoder::for_each_param(const ConstParamVisitor& f) const {
  const_cast<Autoencoder*>(this)->for_each_param([&](const std::string& n, Mat& m) { f(n, m); });
}

Autoencoder Autoencoder::zeros_like() const {
  Autoencoder z = *this;
  z.for_each_param([](const std::string&, Mat& m) { m.setZero(); });
  return z;
}

std::vector<Mat*> Autoencoder::param_ptrs() {
  std::vector<Mat*> out;
  for_each_param([&](const std::string&, Mat& m) { out.push_back(&m); });
  return out;
}

std::vector<const Mat*> Autoencoder::param_ptrs() const {
  std::vector<const Mat*> out;
  for_each_param([&](const std::string&, const Mat& m) { out.push_back(&m); });
  return out;
}

AutoencoderForward ae_forward(const Autoencoder& ae, const Sequence& x, double noise_sigma, Mode mode,
                              RngSeed seed) {
  if (x.empty()) throw DimensionError("ae_forward: empty sequence");
  if (x.front().cols() != ae.spec.input_dim) throw DimensionError("ae_forward: feature count mismatch");
  if (noise_sigma < 0) throw std::invalid_argument("ae_forward: noise_sigma must be >= 0");
  AutoencoderForward out;
  auto& c = out.cache;
  c.noisy_input = x;
  if (noise_sigma > 0) {
    Rng rng(derive_seed(seed.value, 0x401));
    for (auto& m : c.noisy_input) {
      for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] += rng.normal(0.0, noise_sigma);
    }
  }
  const Sequence* in = &c.noisy_input;
  Sequence h;
  for (std::size_t k = 0; k < ae.encoder.size(); ++k) {
    Rng rng(derive_seed(seed.value, 300 + k));
    auto res = lstm_forward(ae.encoder[k], *in, mode, &rng);
    h = std::move(res.h);
    c.encoder.push_back(std::move(res.cache));
    in = &h;
  }
  out.latent = h.back();
  Sequence dec_in(x.size(), out.latent);
  in = &dec_in;
  for (std::size_t k = 0; k < ae.decoder.size(); ++k) {
    Rng rng(derive_seed(seed.value, 400 + k));
    auto res = lstm_forward(ae.decoder[k], *in, mode, &rng);
    h = std::move(res.h);
    c.decoder.push_back(std::move(res.cache));
    in = &h;
  }
  c.decoder_top = h;
  out.reconstruction.reserve(x.size());
  for (const auto& ht : c.decoder_top) out.reconstruction.push_back(dense_forward(ae.projection, ht));
  if (ae.reverse_decode) std::reverse(out.reconstruction.begin(), out.reconstruction.end());
  return out;
}

AutoencoderBackward ae_backward(const Autoencoder& ae, const AutoencoderCache& cache, const Sequence& grad_recon) {
  const std::size_t steps = cache.decoder_top.size();
  if (grad_recon.size() != steps) throw DimensionError("ae_backward: gradient length mismatch");
  AutoencoderBackward out;
  out.grads = ae.zeros_like();
  Sequence g = grad_recon;
  if (ae.reverse_decode) std::reverse(g.begin(), g.end());
  Sequence grad_h(steps);
  for (std::size_t t = 0; t < steps; ++t) {
    DenseGrads dg;
    grad_h[t] = dense_backward(ae.projection, cache.decoder_top[t], g[t], dg);
    out.grads.projection.W += dg.W;
    out.grads.projection.b += dg.b;
  }
  for (std::size_t k = ae.decoder.size(); k-- > 0;) {
    auto back = lstm_backward(ae.decoder[k], cache.decoder[k], grad_h);
    out.grads.decoder[k].W = std::move(back.grads.W);
    out.grads.decoder[k].U = std::move(back.grads.U);
    out.grads.decoder[k].b = std::move(back.grads.b);
    grad_h = std::move(back.grad_x);
  }
  Mat d_latent = Mat::Zero(grad_h.front().rows(), grad_h.front().cols());
  for (const auto& gt : grad_h) d_latent += gt;
  Sequence enc_grad(steps);
  for (std::size_t t = 0; t + 1 < steps; ++t) enc_grad[t] = Mat::Zero(d_latent.rows(), d_latent.cols());
  enc_grad[steps - 1] = d_latent;
  for (std::size_t k = ae.encoder.size(); k-- > 0;) {
    auto back = lstm_backward(ae.encoder[k], cache.encoder[k], enc_grad);
    out.grads.encoder[k].W = std::move(back.grads.W);
    out.grads.encoder[k].U = std::move(back.grads.U);
    out.grads.encoder[k].b = std::move(back.grads.b);
    enc_grad = std::move(back.grad_x);
  }
  return out;
}

Mat encode(const Autoencoder& ae, const Sequence& x) {
  const Sequence* in = &x;
  Sequence h;
  for (const auto& layer : ae.encoder) {
    h = lstm_forward(layer, *in, Mode::eval, nullptr).h;
    in = &h;
  }
  return h.back();
}

Sequence to_sequence(const std::vector<const Mat*>& windows) {
  if (windows.empty()) throw DimensionError("to_sequence: empty batch");
  const Eigen::Index steps = windows.front()->rows();
  const Eigen::Index nf = windows.front()->cols();
  Sequence seq(static_cast<std::size_t>(steps), Mat(static_cast<Eigen::Index>(windows.size()), nf));
  for (std::size_t b = 0; b < windows.size(); ++b) {
    if (windows[b]->rows() != steps || windows[b]->cols() != nf) throw DimensionError("to_sequence: ragged batch");
    for (Eigen::Index t = 0; t < steps; ++t) seq[t].row(static_cast<Eigen::Index>(b)) = windows[b]->row(t);
  }
  return seq;
}

Sequence to_sequence(const std::vector<Mat>& windows) {
  std::vector<const Mat*> ptrs;
  ptrs.reserve(windows.size());
  for (const auto& w : windows) ptrs.push_back(&w);
  return to_sequence(ptrs);
}

Mat window_of(const Sequence& seq, Eigen::Index b) {
  Mat w(static_cast<Eigen::Index>(seq.size()), seq.front().cols());
  for (std::size_t t = 0; t < seq.size(); ++t) w.row(static_cast<Eigen::Index>(t)) = seq[t].row(b);
  return w;
}

}  // namespace sslseq::nn
