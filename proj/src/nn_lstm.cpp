// SPDX-License-Identifier: Apache-2.0
#include "sslseq/nn.hpp"

#include <cmath>

namespace sslseq::nn {

Sequence zeros_like(const Sequence& s) {
  Sequence out;
  out.reserve(s.size());
  for (const auto& m : s) out.push_back(Mat::Zero(m.rows(), m.cols()));
  return out;
}

LstmLayer LstmLayer::init(int input_dim, int hidden_dim, double dropout, double recurrent_dropout, Rng& rng) {
  if (input_dim < 1 || hidden_dim < 1) throw DimensionError("LstmLayer: dimensions must be >= 1");
  if (dropout < 0 || dropout >= 1 || recurrent_dropout < 0 || recurrent_dropout >= 1) {
    throw std::invalid_argument("LstmLayer: dropout rates must lie in [0, 1)");
  }
  LstmLayer l;
  l.input_dim = input_dim;
  l.hidden_dim = hidden_dim;
  l.dropout = dropout;
  l.recurrent_dropout = recurrent_dropout;
  const int h4 = 4 * hidden_dim;
  const double limit = std::sqrt(6.0 / (input_dim + h4));
  l.W.resize(h4, input_dim);
  for (Eigen::Index k = 0; k < l.W.size(); ++k) l.W.data()[k] = rng.uniform(-limit, limit);
  Mat gauss(h4, hidden_dim);
  for (Eigen::Index k = 0; k < gauss.size(); ++k) gauss.data()[k] = rng.normal();
  Eigen::HouseholderQR<Mat> qr(gauss);
  Mat q = qr.householderQ() * Mat::Identity(h4, hidden_dim);
  // Sign-fix so the factorization is unique.
  for (int j = 0; j < hidden_dim; ++j) {
    if (qr.matrixQR()(j, j) < 0) q.col(j) *= -1.0;
  }
  l.U = q;
  l.b = Mat::Zero(h4, 1);
  l.b.block(hidden_dim, 0, hidden_dim, 1).setOnes();
  return l;
}

namespace {

Mat sigmoid_m(const Mat& a) { return (1.0 / (1.0 + (-a.array()).exp())).matrix(); }

}  // namespace

LstmOutput lstm_forward(const LstmLayer& layer, const Sequence& x, Mode mode, Rng* rng) {
  const int d = layer.input_dim;
  const int h = layer.hidden_dim;
  if (x.empty()) throw DimensionError("lstm_forward: empty sequence");
  const Eigen::Index batch = x.front().rows();
  for (const auto& xt : x) {
    if (xt.cols() != d || xt.rows() != batch) {
      throw DimensionError("lstm_forward: expected B x " + std::to_string(d) + " inputs, got " +
                           std::to_string(xt.rows()) + " x " + std::to_string(xt.cols()));
    }
    if (!xt.allFinite()) throw std::invalid_argument("lstm_forward: non-finite input");
  }
  const bool train = mode == Mode::train;
  const bool in_drop = train && layer.dropout > 0.0;
  const bool rec_drop = train && layer.recurrent_dropout > 0.0;
  if ((in_drop || rec_drop) && rng == nullptr) throw std::invalid_argument("lstm_forward: dropout needs an rng");

  const std::size_t steps = x.size();
  LstmOutput out;
  auto& c = out.cache;
  c.x.reserve(steps);
  c.c.push_back(Mat::Zero(batch, h));
  if (rec_drop) c.recurrent_mask = dropout_mask(batch, h, layer.recurrent_dropout, *rng);

  const Mat wt = layer.W.transpose();
  const Mat ut = layer.U.transpose();
  const Eigen::RowVectorXd bias = layer.b.col(0).transpose();
  Mat h_prev = Mat::Zero(batch, h);
  for (std::size_t t = 0; t < steps; ++t) {
    Mat xt = x[t];
    if (in_drop) {
      c.input_mask.push_back(dropout_mask(batch, d, layer.dropout, *rng));
      xt = xt.cwiseProduct(c.input_mask.back());
    }
    Mat hp = rec_drop ? Mat(h_prev.cwiseProduct(c.recurrent_mask)) : h_prev;
    Mat a = xt * wt + hp * ut;
    a.rowwise() += bias;
    Mat ig = sigmoid_m(a.middleCols(0, h));
    Mat fg = sigmoid_m(a.middleCols(h, h));
    Mat gg = a.middleCols(2 * h, h).array().tanh().matrix();
    Mat og = sigmoid_m(a.middleCols(3 * h, h));
    Mat ct = fg.cwiseProduct(c.c.back()) + ig.cwiseProduct(gg);
    Mat tc = ct.array().tanh().matrix();
    Mat ht = og.cwiseProduct(tc);
    c.x.push_back(std::move(xt));
    c.h_prev.push_back(std::move(hp));
    c.i.push_back(std::move(ig));
    c.f.push_back(std::move(fg));
    c.g.push_back(std::move(gg));
    c.o.push_back(std::move(og));
    c.c.push_back(std::move(ct));
    c.tanh_c.push_back(std::move(tc));
    out.h.push_back(ht);
    h_prev = std::move(ht);
  }
  return out;
}

LstmBackward lstm_backward(const LstmLayer& layer, const LstmCache& cache, const Sequence& grad_h) {
  const int h = layer.hidden_dim;
  const std::size_t steps = cache.x.size();
  if (grad_h.size() != steps) throw DimensionError("lstm_backward: gradient length mismatch");
  const Eigen::Index batch = cache.x.front().rows();

  LstmBackward out;
  out.grads.W = Mat::Zero(layer.W.rows(), layer.W.cols());
  out.grads.U = Mat::Zero(layer.U.rows(), layer.U.cols());
  out.grads.b = Mat::Zero(layer.b.rows(), 1);
  out.grad_x.resize(steps);

  Mat dh_next = Mat::Zero(batch, h);
  Mat dc_next = Mat::Zero(batch, h);
  Mat da(batch, 4 * h);
  for (std::size_t k = steps; k-- > 0;) {
    const Mat dh = grad_h[k] + dh_next;
    const auto& ig = cache.i[k];
    const auto& fg = cache.f[k];
    const auto& gg = cache.g[k];
    const auto& og = cache.o[k];
    const auto& tc = cache.tanh_c[k];
    const Mat dc = dh.cwiseProduct(og).cwiseProduct((1.0 - tc.array().square()).matrix()) + dc_next;
    da.middleCols(0, h) = dc.cwiseProduct(gg).cwiseProduct((ig.array() * (1.0 - ig.array())).matrix());
    da.middleCols(h, h) = dc.cwiseProduct(cache.c[k]).cwiseProduct((fg.array() * (1.0 - fg.array())).matrix());
    da.middleCols(2 * h, h) = dc.cwiseProduct(ig).cwiseProduct((1.0 - gg.array().square()).matrix());
    da.middleCols(3 * h, h) = dh.cwiseProduct(tc).cwiseProduct((og.array() * (1.0 - og.array())).matrix());
    dc_next = dc.cwiseProduct(fg);

    out.grads.W.noalias() += da.transpose() * cache.x[k];
    out.grads.U.noalias() += da.transpose() * cache.h_prev[k];
    out.grads.b += da.colwise().sum().transpose();

    Mat dx = da * layer.W;
    if (!cache.input_mask.empty()) dx = dx.cwiseProduct(cache.input_mask[k]);
    out.grad_x[k] = std::move(dx);
    Mat dhp = da * layer.U;
    if (cache.recurrent_mask.size() > 0) dhp = dhp.cwiseProduct(cache.recurrent_mask);
    dh_next = std::move(dhp);
  }
  return out;
}

}  // namespace sslseq::nn
