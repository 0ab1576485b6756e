// SPDX-License-Identifier: Apache-2.0
// Acceptance run: one PASS/FAIL line per criterion.
// Usage: acceptance [criterion numbers...]   (default: all)
#include "sslseq/active.hpp"
#include "sslseq/augment.hpp"
#include "sslseq/autoencoder.hpp"
#include "sslseq/bench.hpp"
#include "sslseq/config.hpp"
#include "sslseq/evaluation.hpp"
#include "sslseq/features.hpp"
#include "sslseq/saliency.hpp"
#include "sslseq/sweep.hpp"
#include "sslseq/synth.hpp"
#include "sslseq/trainer.hpp"

#include <algorithm>
#include <chrono>
#include <complex>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <functional>
#include <iostream>
#include <map>
#include <numbers>
#include <set>
#include <sstream>
#include <string>
#include <vector>

using namespace sslseq;
namespace fs = std::filesystem;

namespace {

// ---- tolerances ------------------------------------------------------------
constexpr double kFdStep = 1e-6;
constexpr double kFdRelTol = 1e-4;
constexpr double kFdFloor = 1e-6;       // absolute floor of the relative-error denominator
constexpr int kFdPoints = 10;           // random coordinates per backward pass
constexpr double kGradSuiteSeconds = 60.0;
constexpr double kAeLossTol = 1e-12;
constexpr double kNllTol = 1e-10;
constexpr double kModeTol = 1e-9;
constexpr double kEmSlack = 1e-10;      // allowed per-iteration log-likelihood drop (rounding)
constexpr double kHandTraceTol = 1e-10;
constexpr double kHrvRelTol = 1e-9;     // hand values are quoted to 12 significant digits
constexpr double kBandShare = 0.95;
constexpr double kScrMagnitudeTol = 0.10;
constexpr double kChanceTol = 0.02;
constexpr int kChanceReps = 10000;
constexpr double kAlpha = 0.05;
constexpr double kMinRelGain = 0.05;
constexpr double kActiveSeconds = 30 * 60.0;
constexpr double kAblationSeconds = 2 * 3600.0;
constexpr double kSaliencyRatio = 2.0;

const fs::path kSourceDir = SSLSEQ_SOURCE_DIR;
const fs::path kCli = SSLSEQ_CLI_PATH;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string f(double v, int prec = 4) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.*g", prec, v);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

Mat randn(Eigen::Index r, Eigen::Index c, Rng& rng, double sd = 1.0) {
  Mat m(r, c);
  for (Eigen::Index k = 0; k < m.size(); ++k) m.data()[k] = rng.normal(0.0, sd);
  return m;
}

nn::Sequence rand_seq(int steps, int batch, int dim, Rng& rng) {
  nn::Sequence s;
  for (int t = 0; t < steps; ++t) s.push_back(randn(batch, dim, rng));
  return s;
}

double weighted_sum(const nn::Sequence& s, const nn::Sequence& r) {
  double acc = 0;
  for (std::size_t t = 0; t < s.size(); ++t) acc += (s[t].array() * r[t].array()).sum();
  return acc;
}

double sig(double z) { return 1.0 / (1.0 + std::exp(-z)); }

// ---- 1. gradients ------------------------------------------------------------

struct GradProbe {
  std::string name;
  double worst = 0.0;
  int points = 0;
};

// Central differences at kFdPoints random coordinates drawn across `targets`.
GradProbe probe(const std::string& name, const std::vector<std::pair<Mat*, const Mat*>>& targets,
                const std::function<double()>& loss, Rng& pick) {
  GradProbe p{name};
  Eigen::Index total = 0;
  for (const auto& [m, g] : targets) {
    if (m->rows() != g->rows() || m->cols() != g->cols()) {
      p.worst = INFINITY;
      return p;
    }
    total += m->size();
  }
  for (int k = 0; k < kFdPoints; ++k) {
    Eigen::Index flat = static_cast<Eigen::Index>(pick.index(static_cast<std::size_t>(total)));
    std::size_t t = 0;
    while (flat >= targets[t].first->size()) flat -= targets[t++].first->size();
    Mat& m = *targets[t].first;
    const double keep = m.data()[flat];
    m.data()[flat] = keep + kFdStep;
    const double up = loss();
    m.data()[flat] = keep - kFdStep;
    const double down = loss();
    m.data()[flat] = keep;
    const double num = (up - down) / (2 * kFdStep);
    const double an = targets[t].second->data()[flat];
    p.worst = std::max(p.worst, std::abs(num - an) / std::max({kFdFloor, std::abs(num), std::abs(an)}));
    ++p.points;
  }
  return p;
}

template <class Net>
std::vector<std::pair<Mat*, const Mat*>> param_pairs(Net& net, const Net& grads) {
  std::vector<const Mat*> g;
  grads.for_each_param([&](const std::string&, const Mat& m) { g.push_back(&m); });
  std::vector<std::pair<Mat*, const Mat*>> out;
  std::size_t i = 0;
  net.for_each_param([&](const std::string&, Mat& m) { out.emplace_back(&m, g[i++]); });
  return out;
}

Outcome gradients() {
  const auto t0 = std::chrono::steady_clock::now();
  Rng rng(2024), pick(7);
  std::vector<GradProbe> probes;

  {  // LSTM with input and recurrent dropout
    nn::LstmLayer layer = nn::LstmLayer::init(3, 4, 0.3, 0.4, rng);
    layer.b += randn(16, 1, rng, 0.1);
    nn::Sequence x = rand_seq(5, 3, 3, rng);
    const nn::Sequence r = rand_seq(5, 3, 4, rng);
    auto loss = [&] {
      Rng mask(99);
      return weighted_sum(nn::lstm_forward(layer, x, nn::Mode::train, &mask).h, r);
    };
    Rng mask(99);
    const auto fwd = nn::lstm_forward(layer, x, nn::Mode::train, &mask);
    const auto back = nn::lstm_backward(layer, fwd.cache, r);
    std::vector<std::pair<Mat*, const Mat*>> t{{&layer.W, &back.grads.W}, {&layer.U, &back.grads.U},
                                               {&layer.b, &back.grads.b}};
    for (std::size_t s = 0; s < x.size(); ++s) t.emplace_back(&x[s], &back.grad_x[s]);
    probes.push_back(probe("lstm", t, loss, pick));
  }
  {  // batch norm, train mode
    nn::BatchNorm bn = nn::BatchNorm::init(4);
    bn.gamma = randn(4, 1, rng);
    bn.beta = randn(4, 1, rng);
    Mat x = randn(6, 4, rng);
    const Mat r = randn(6, 4, rng);
    auto loss = [&] {
      nn::BatchNormCache c;
      return (nn::batchnorm_forward(bn, x, nn::Mode::train, c).array() * r.array()).sum();
    };
    nn::BatchNormCache cache;
    nn::batchnorm_forward(bn, x, nn::Mode::train, cache);
    nn::BatchNormGrads g;
    const Mat gx = nn::batchnorm_backward(bn, cache, r, g);
    probes.push_back(probe("batchnorm", {{&bn.gamma, &g.gamma}, {&bn.beta, &g.beta}, {&x, &gx}}, loss, pick));
  }
  {  // dense + relu
    nn::Dense d = nn::Dense::init(5, 3, rng);
    d.b = randn(3, 1, rng);
    Mat x = randn(4, 5, rng);
    const Mat r = randn(4, 3, rng);
    auto loss = [&] { return (nn::relu_forward(nn::dense_forward(d, x)).array() * r.array()).sum(); };
    nn::DenseGrads g;
    const Mat gx = nn::dense_backward(d, x, nn::relu_backward(nn::dense_forward(d, x), r), g);
    probes.push_back(probe("dense", {{&d.W, &g.W}, {&d.b, &g.b}, {&x, &gx}}, loss, pick));
  }
  {  // dropout with a fixed mask
    Mat x = randn(5, 6, rng);
    const Mat r = randn(5, 6, rng);
    const Mat mask = nn::dropout_mask(5, 6, 0.4, rng);
    auto loss = [&] { return (nn::dropout_forward(x, mask).array() * r.array()).sum(); };
    const Mat gx = nn::dropout_backward(r, mask);
    probes.push_back(probe("dropout", {{&x, &gx}}, loss, pick));
  }
  {  // BCE
    Mat z = randn(8, 1, rng, 2.0);
    Vec y(8);
    for (int i = 0; i < 8; ++i) y(i) = i % 3 == 0;
    const Mat g = nn::bce_loss(z.col(0), y).grad;
    probes.push_back(probe("bce", {{&z, &g}}, [&] { return nn::bce_loss(z.col(0), y).loss; }, pick));
  }
  {  // KL
    Mat z = randn(8, 1, rng, 2.0);
    Vec p(8);
    for (int i = 0; i < 8; ++i) p(i) = rng.uniform(0.05, 0.95);
    const Mat g = nn::kl_bernoulli(p, z.col(0)).grad;
    probes.push_back(probe("kl", {{&z, &g}}, [&] { return nn::kl_bernoulli(p, z.col(0)).loss; }, pick));
  }
  {  // composite loss with fixed consistency targets
    nn::NetworkSpec spec;
    spec.input_dim = 2;
    spec.lstm_layers = {{3, 0.2, 0.2}};
    spec.dense_hidden = 4;
    spec.dense_dropout = 0.2;
    nn::Classifier net = nn::Classifier::init(spec, {5});
    train::CompositeBatch b;
    b.labeled = rand_seq(3, 4, 2, rng);
    b.labels = (Vec(4) << 1, 0, 1, 0).finished();
    b.labeled_aug = {rand_seq(3, 4, 2, rng), rand_seq(3, 4, 2, rng)};
    b.unlabeled = rand_seq(3, 5, 2, rng);
    b.unlabeled_aug = {rand_seq(3, 5, 2, rng), rand_seq(3, 5, 2, rng)};
    b.p_labeled = (Vec(4) << 0.8, 0.3, 0.6, 0.2).finished();
    b.p_unlabeled = (Vec(5) << 0.5, 0.2, 0.9, 0.4, 0.7).finished();
    const train::LossWeights w{0.8, 1.2, 2};
    auto loss = [&] { return train::composite_loss(net, b, w, {21}, true).terms.total; };
    const auto r = train::composite_loss(net, b, w, {21}, true);
    probes.push_back(probe("composite", param_pairs(net, r.grads), loss, pick));
  }
  {  // saliency path: eval-mode input gradient of the logit
    nn::NetworkSpec spec;
    spec.input_dim = 3;
    spec.lstm_layers = {{5, 0.3, 0.2}, {4, 0.0, 0.0}};
    spec.dense_hidden = 6;
    spec.dense_dropout = 0.5;
    nn::Classifier net = nn::Classifier::init(spec, {8});
    net.bn.running_mean = randn(4, 1, rng, 0.2);
    net.bn.running_var = randn(4, 1, rng, 0.1).array().abs() + 0.5;
    Mat w = randn(6, 3, rng);
    auto loss = [&] {
      return nn::classifier_forward(net, nn::to_sequence(std::vector<const Mat*>{&w}), nn::Mode::eval, {0}).logits(0);
    };
    // saliency is |gradient|; compare the signed gradient and the absolute map separately
    const auto fwd = nn::classifier_forward(net, nn::to_sequence(std::vector<const Mat*>{&w}), nn::Mode::eval, {0});
    const Mat g = nn::window_of(nn::classifier_backward(net, fwd.cache, Vec::Ones(1)).grad_x, 0);
    probes.push_back(probe("saliency", {{&w, &g}}, loss, pick));
    const Mat map = saliency::sample_saliency(net, w);
    if (!map.isApprox(g.cwiseAbs(), 1e-12)) probes.back().worst = INFINITY;
  }
  {  // full classifier, train mode
    nn::NetworkSpec spec;
    spec.input_dim = 3;
    spec.lstm_layers = {{5, 0.2, 0.3}, {4, 0.2, 0.0}};
    spec.dense_hidden = 6;
    spec.dense_dropout = 0.3;
    nn::Classifier net = nn::Classifier::init(spec, {7});
    nn::Sequence x = rand_seq(4, 3, 3, rng);
    const Vec y = (Vec(3) << 1, 0, 1).finished();
    auto loss = [&] { return nn::bce_loss(nn::classifier_forward(net, x, nn::Mode::train, {123}).logits, y).loss; };
    const auto fwd = nn::classifier_forward(net, x, nn::Mode::train, {123});
    const auto back = nn::classifier_backward(net, fwd.cache, nn::bce_loss(fwd.logits, y).grad);
    auto t = param_pairs(net, back.grads);
    for (std::size_t s = 0; s < x.size(); ++s) t.emplace_back(&x[s], &back.grad_x[s]);
    probes.push_back(probe("classifier", t, loss, pick));
  }
  {  // sequence autoencoder
    nn::NetworkSpec spec;
    spec.input_dim = 2;
    spec.lstm_layers = {{3, 0.0, 0.0}, {2, 0.0, 0.0}};
    spec.head = nn::Head::seq_decoder;
    nn::Autoencoder ae = nn::Autoencoder::init(spec, {3});
    const nn::Sequence x = rand_seq(4, 2, 2, rng);
    const nn::Sequence r = rand_seq(4, 2, 2, rng);
    auto loss = [&] { return weighted_sum(nn::ae_forward(ae, x, 0.05, nn::Mode::train, {5}).reconstruction, r); };
    const auto fwd = nn::ae_forward(ae, x, 0.05, nn::Mode::train, {5});
    const auto back = nn::ae_backward(ae, fwd.cache, r);
    probes.push_back(probe("autoencoder", param_pairs(ae, back.grads), loss, pick));
  }

  const double secs = seconds_since(t0);
  bool ok = secs < kGradSuiteSeconds;
  std::string d;
  for (const auto& p : probes) {
    ok = ok && p.points == kFdPoints && p.worst < kFdRelTol;
    d += p.name + "=" + f(p.worst, 2) + " ";
  }
  return {ok, "max rel err per pass: " + d + "(" + f(secs, 3) + " s)"};
}

// ---- 2. reconstruction loss -------------------------------------------------

Outcome ae_loss_oracle() {
  Rng rng(11);
  double worst = 0;
  for (int n = 0; n < 100; ++n) {
    const int T = 1 + static_cast<int>(rng.index(12)), B = 1 + static_cast<int>(rng.index(8)),
              F = 1 + static_cast<int>(rng.index(6));
    const auto x = rand_seq(T, B, F, rng), y = rand_seq(T, B, F, rng);
    long double acc = 0;
    for (int t = 0; t < T; ++t)
      for (int b = 0; b < B; ++b)
        for (int j = 0; j < F; ++j) {
          const long double d = static_cast<long double>(x[t](b, j)) - y[t](b, j);
          acc += d * d;
        }
    const double brute = static_cast<double>(acc / (T * B * F));
    worst = std::max(worst, std::abs(ae::ae_loss(x, y) - brute));
  }
  return {worst <= kAeLossTol, "100 random tensors, max |diff| = " + f(worst, 3)};
}

// ---- 3. mixture NLL -------------------------------------------------------------

double naive_nll(const active::GmmModel& m, const Vec& h) {
  const int H = m.dim();
  double dens = 0;
  for (int k = 0; k < m.k(); ++k) {
    const Vec d = h - m.means.row(k).transpose();
    const Mat inv = m.covs[static_cast<std::size_t>(k)].inverse();
    const double det = m.covs[static_cast<std::size_t>(k)].determinant();
    dens += m.weights(k) * std::pow(2 * std::numbers::pi, -H / 2.0) / std::sqrt(det) *
            std::exp(-0.5 * d.dot(inv * d));
  }
  return -std::log(dens);
}

Outcome nll_oracle() {
  Rng rng(3);
  double worst = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const int K = 1 + trial % 4, H = 1 + trial % 3;
    active::GmmModel m;
    m.weights = Vec(K);
    for (int k = 0; k < K; ++k) m.weights(k) = rng.uniform(0.2, 1.0);
    m.weights /= m.weights.sum();
    m.means = randn(K, H, rng, 2.0);
    for (int k = 0; k < K; ++k) {
      const Mat a = randn(H, H, rng, 0.5);
      m.covs.push_back(a * a.transpose() + 0.5 * Mat::Identity(H, H));
    }
    for (int i = 0; i < 20; ++i) {
      const Vec h = m.means.row(static_cast<Eigen::Index>(rng.index(static_cast<std::size_t>(K)))).transpose() +
                    Vec(randn(H, 1, rng));
      worst = std::max(worst, std::abs(active::nll(m, h) - naive_nll(m, h)));
    }
  }
  active::GmmModel unit;
  unit.weights = Vec::Ones(1);
  unit.means = Mat::Zero(1, 1);
  unit.covs = {Mat::Identity(1, 1)};
  const double mode = active::nll(unit, Vec(Vec::Zero(1)));
  const double mode_err = std::abs(mode - 0.5 * std::log(2 * std::numbers::pi));

  int monotone = 0;
  double worst_drop = 0;
  for (int trial = 0; trial < 20; ++trial) {
    Rng r(derive_seed(500, static_cast<std::uint64_t>(trial)));
    const int K = 2 + trial % 3, H = 1 + trial % 3, N = 150;
    Mat x(N, H);
    for (int i = 0; i < N; ++i) {
      const double c = 3.0 * static_cast<double>(r.index(static_cast<std::size_t>(K)));
      for (int j = 0; j < H; ++j) x(i, j) = c + r.normal();
    }
    active::GmmOptions opt;
    opt.restarts = 1;
    const auto g = active::fit_gmm(x, K, {static_cast<std::uint64_t>(trial)}, opt);
    bool ok = true;
    for (std::size_t i = 1; i < g.ll_trace.size(); ++i) {
      const double drop = g.ll_trace[i - 1] - g.ll_trace[i];
      worst_drop = std::max(worst_drop, drop);
      if (drop > kEmSlack) ok = false;
    }
    monotone += ok;
  }
  const bool pass = worst <= kNllTol && mode_err <= kModeTol && monotone == 20;
  return {pass, "max |nll - naive| = " + f(worst, 3) + ", mode value err = " + f(mode_err, 3) +
                    ", EM monotone on " + std::to_string(monotone) + "/20 fits (largest drop " + f(worst_drop, 3) +
                    ")"};
}

// ---- 4. composite loss reductions ---------------------------------------------

Outcome composite_reductions() {
  Rng rng(4);
  bool ok = true;
  std::string d;
  {  // zero weights: plain BCE, bit for bit
    nn::NetworkSpec spec;
    spec.input_dim = 2;
    spec.lstm_layers = {{3, 0.0, 0.0}};
    spec.dense_hidden = 4;
    const nn::Classifier net = nn::Classifier::init(spec, {3});
    std::vector<Mat> ws{randn(4, 2, rng), randn(4, 2, rng), randn(4, 2, rng)};
    std::vector<const Mat*> p{&ws[0], &ws[1], &ws[2]};
    const Vec y = (Vec(3) << 1, 0, 1).finished();
    train::LossWeights w{0.0, 0.0, 3};
    const auto r = train::composite_loss(net, p, y, p, w, {}, {7});
    const double ref =
        nn::bce_loss(nn::classifier_forward(net, nn::to_sequence(p), nn::Mode::train, {0}).logits, y).loss;
    const bool bit = r.terms.total == ref;
    ok = ok && bit;
    d += std::string("zero-weight bit-exact=") + (bit ? "yes" : "no");
  }
  {  // identity augmentation
    nn::NetworkSpec spec;
    spec.input_dim = 2;
    spec.lstm_layers = {{3, 0.0, 0.0}};
    spec.batch_norm = false;
    const nn::Classifier net = nn::Classifier::init(spec, {4});
    std::vector<Mat> ws{randn(5, 2, rng), randn(5, 2, rng), randn(5, 2, rng), randn(5, 2, rng)};
    std::vector<const Mat*> lab{&ws[0], &ws[1]}, unl{&ws[2], &ws[3]};
    augment::AugmentationSpec id;
    id.jitter_sigma = 0;
    id.scale_dist = {1.0, 0.0};
    id.mw_dist = {1.0, 0.0};
    id.tw_sigma = 0;
    const auto r = train::composite_loss(net, lab, (Vec(2) << 0, 1).finished(), unl, {1.0, 1.0, 3}, id, {9}, true);
    const double kl = std::abs(r.terms.kl_l) + std::abs(r.terms.kl_u);
    ok = ok && kl < 1e-15;
    d += ", identity-aug KL=" + f(kl, 2);
  }
  {  // hand trace, one LSTM unit, one step
    const double wi = 0.6, wg = -0.9, wo = 0.4, bi = 0.1, bg = 0.2, bo = -0.3, ow = 1.7, ob = 0.05;
    nn::NetworkSpec spec;
    spec.input_dim = 1;
    spec.lstm_layers = {{1, 0.0, 0.0}};
    spec.batch_norm = false;
    nn::Classifier net = nn::Classifier::init(spec, {1});
    net.lstm[0].W = (Mat(4, 1) << wi, 0.3, wg, wo).finished();
    net.lstm[0].b = (Mat(4, 1) << bi, 1.0, bg, bo).finished();
    net.out.W = Mat::Constant(1, 1, ow);
    net.out.b = Mat::Constant(1, 1, ob);
    auto z = [&](double x) { return ow * sig(wo * x + bo) * std::tanh(sig(wi * x + bi) * std::tanh(wg * x + bg)) + ob; };
    auto bce = [&](double x, double y) { return -(y * std::log(sig(z(x))) + (1 - y) * std::log(1 - sig(z(x)))); };
    auto kl = [&](double p, double x) {
      const double q = sig(z(x));
      return p * std::log(p / q) + (1 - p) * std::log((1 - p) / (1 - q));
    };
    auto col = [](double a, double b) { return nn::Sequence{(Mat(2, 1) << a, b).finished()}; };
    train::CompositeBatch b;
    b.labeled = col(0.5, -0.3);
    b.labels = (Vec(2) << 1, 0).finished();
    b.labeled_aug = {col(0.55, -0.2), col(0.4, -0.35)};
    b.unlabeled = col(1.1, 0.0);
    b.unlabeled_aug = {col(1.0, 0.1), col(1.3, -0.05)};
    b.p_labeled = (Vec(2) << 0.7, 0.4).finished();
    b.p_unlabeled = (Vec(2) << 0.55, 0.35).finished();
    const double ce = (bce(0.5, 1) + bce(-0.3, 0)) / 2;
    const double kll = (kl(0.7, 0.55) + kl(0.4, -0.2) + kl(0.7, 0.4) + kl(0.4, -0.35)) / 4;
    const double klu = (kl(0.55, 1.0) + kl(0.35, 0.1) + kl(0.55, 1.3) + kl(0.35, -0.05)) / 4;
    const double hand = ce + 0.7 * kll + 1.3 * klu;
    const double got = train::composite_loss(net, b, {0.7, 1.3, 2}, {1}).terms.total;
    ok = ok && std::abs(got - hand) <= kHandTraceTol;
    d += ", M=2 hand trace |diff|=" + f(std::abs(got - hand), 2);
  }
  return {ok, d};
}

// ---- 5. augmentation identities -------------------------------------------------

Outcome augmentation_identities() {
  using namespace augment;
  Rng rng(5);
  const Mat w = randn(24, 5, rng);
  bool ident = jitter(w, 0.0, {3}) == w && scale(w, {1.0, 0.0}, {3}) == w &&
               scale(w, {1.0, 0.0}, {3}, ScalePer::window) == w && magnitude_warp(w, {1.0, 0.0}, 4, {3}) == w &&
               time_warp(w, 4, 0.0, {3}) == w;
  AugmentationSpec zero;
  zero.jitter_sigma = 0;
  zero.scale_dist = {1.0, 0.0};
  zero.mw_dist = {1.0, 0.0};
  zero.tw_sigma = 0;
  ident = ident && apply(w, zero, {4}) == w;

  long shape_bad = 0, label_bad = 0, endpoint_bad = 0;
  AugmentationSpec spec;
  spec.copies = 1;
  for (int s = 0; s < 10000; ++s) {
    Rng g(derive_seed(77, static_cast<std::uint64_t>(s)));
    const int T = 2 + static_cast<int>(g.index(30)), F = 1 + static_cast<int>(g.index(6));
    data::SequenceWindow sw;
    sw.features = randn(T, F, g, 1.0 + g.uniform(0, 3));
    if (s % 3) {
      sw.raw_level = 1 + static_cast<int>(g.index(7));
      sw.label = *sw.raw_level > 1 ? data::BinaryLabel::stressed : data::BinaryLabel::non_stressed;
    }
    sw.participant_id = "P" + std::to_string(s % 17);
    const auto out = augment_batch({sw}, spec, {static_cast<std::uint64_t>(s)});
    const auto& a = out[0][0];
    shape_bad += a.features.rows() != T || a.features.cols() != F;
    label_bad += a.label != sw.label || a.raw_level != sw.raw_level || a.participant_id != sw.participant_id;
    const Mat tw = time_warp(sw.features, 4, 0.2 + 0.5 * g.uniform(), {static_cast<std::uint64_t>(s)});
    endpoint_bad += tw.row(0) != sw.features.row(0) || tw.row(T - 1) != sw.features.row(T - 1);
  }
  const bool ok = ident && shape_bad == 0 && label_bad == 0 && endpoint_bad == 0;
  return {ok, std::string("zero-noise identities ") + (ident ? "exact" : "BROKEN") + "; 10000 fuzzed windows: " +
                  std::to_string(shape_bad) + " shape, " + std::to_string(label_bad) + " label, " +
                  std::to_string(endpoint_bad) + " endpoint violations"};
}

// ---- 6. feature oracles ------------------------------------------------------------

// Every time-domain value of a series, computed directly.
std::map<std::string, double> hand_time(const std::vector<double>& rr) {
  const double n = static_cast<double>(rr.size());
  double mean = 0;
  for (double v : rr) mean += v;
  mean /= n;
  double ss = 0;
  for (double v : rr) ss += (v - mean) * (v - mean);
  std::vector<double> d;
  for (std::size_t i = 1; i < rr.size(); ++i) d.push_back(rr[i] - rr[i - 1]);
  double dm = 0, d2 = 0;
  for (double v : d) {
    dm += v;
    d2 += v * v;
  }
  dm /= static_cast<double>(d.size());
  double dss = 0;
  for (double v : d) dss += (v - dm) * (v - dm);
  double n50 = 0, n20 = 0;
  for (double v : d) {
    n50 += std::abs(v) > 50;
    n20 += std::abs(v) > 20;
  }
  std::vector<double> s = rr;
  std::sort(s.begin(), s.end());
  const double median = s.size() % 2 ? s[s.size() / 2] : (s[s.size() / 2 - 1] + s[s.size() / 2]) / 2;
  std::vector<double> hr;
  for (double v : rr) hr.push_back(60000.0 / v);
  double hm = 0;
  for (double v : hr) hm += v;
  hm /= n;
  double hss = 0;
  for (double v : hr) hss += (v - hm) * (v - hm);
  const double sdnn = std::sqrt(ss / (n - 1));
  const double rmssd = std::sqrt(d2 / static_cast<double>(d.size()));
  return {{"mean_nni", mean},
          {"sdnn", sdnn},
          {"sdsd", std::sqrt(dss / static_cast<double>(d.size()))},
          {"rmssd", rmssd},
          {"median_nni", median},
          {"nni_50", n50},
          {"pnni_50", n50 / static_cast<double>(d.size())},
          {"nni_20", n20},
          {"pnni_20", n20 / static_cast<double>(d.size())},
          {"range_nni", s.back() - s.front()},
          {"cvsd", rmssd / mean},
          {"cvnni", sdnn / mean},
          {"mean_hr", hm},
          {"max_hr", *std::max_element(hr.begin(), hr.end())},
          {"min_hr", *std::min_element(hr.begin(), hr.end())},
          {"std_hr", std::sqrt(hss / n)}};
}

// Share of brute-force DFT power in [lo, hi) for the uniformly sampled tachogram.
double dft_band_share(double tone_hz, double lo, double hi) {
  const double fs = 4.0;
  const int n = 1200;
  std::vector<double> x(n);
  for (int i = 0; i < n; ++i) x[i] = 100.0 * std::sin(2 * std::numbers::pi * tone_hz * i / fs);
  double in = 0, all = 0;
  for (int k = 1; k <= n / 2; ++k) {
    std::complex<double> acc = 0;
    for (int i = 0; i < n; ++i) acc += x[i] * std::polar(1.0, -2 * std::numbers::pi * k * i / n);
    const double p = std::norm(acc), fk = k * fs / n;
    if (fk >= 0.003 && fk < 0.40) all += p;
    if (fk >= lo && fk < hi) in += p;
  }
  return in / all;
}

features::RrSeries sinus_rr(double hz, double seconds) {
  features::RrSeries rr;
  double t = 0;
  while (t < seconds) {
    const double v = 1000.0 + 100.0 * std::sin(2 * std::numbers::pi * hz * t);
    rr.intervals_ms.push_back(v);
    t += v / 1000.0;
  }
  return rr;
}

std::vector<double> scr_trace(double fs, double seconds, const std::vector<double>& onsets, double amp) {
  std::vector<double> x(static_cast<std::size_t>(fs * seconds), 2.0);
  for (std::size_t i = 0; i < x.size(); ++i) {
    const double t = static_cast<double>(i) / fs;
    for (double t0 : onsets) {
      if (t < t0) continue;
      x[i] += t < t0 + 2.0 ? amp * (t - t0) / 2.0 : amp * std::exp(-(t - t0 - 2.0) / 4.0);
    }
  }
  return x;
}

Outcome feature_oracles() {
  const std::vector<std::vector<double>> series{
      {800, 800, 800}, {800, 860, 800}, {600, 700, 650, 900}, {1000, 980, 1030, 1000, 1060}, {1000, 1020}};
  long mismatches = 0;
  double worst = 0;
  for (const auto& s : series) {
    const auto got = features::hrv_time_features({s, 0.0});
    for (const auto& [name, want] : hand_time(s)) {
      const double v = got.at(name);
      const double rel = std::abs(v - want) / std::max(1.0, std::abs(want));
      worst = std::max(worst, rel);
      mismatches += rel > kHrvRelTol;
    }
  }
  const auto lf = features::hrv_freq_features(sinus_rr(0.1, 300)).record;
  const auto hf = features::hrv_freq_features(sinus_rr(0.3, 300)).record;
  const double lf_share = lf.at("lf") / (lf.at("vlf") + lf.at("lf") + lf.at("hf"));
  const double hf_share = hf.at("hf") / (hf.at("vlf") + hf.at("lf") + hf.at("hf"));
  const double oracle_lf = dft_band_share(0.1, 0.04, 0.15), oracle_hf = dft_band_share(0.3, 0.15, 0.40);
  bool nu_ok = true;
  Rng rng(6);
  for (int k = 0; k < 20; ++k) {
    features::RrSeries rr;
    for (int i = 0; i < 300; ++i) rr.intervals_ms.push_back(rng.uniform(700, 1100));
    const auto r = features::hrv_freq_features(rr);
    if (r.record.at("lf") + r.record.at("hf") > 0 && !r.degenerate) {
      nu_ok = nu_ok && std::abs(r.record.at("lfnu") + r.record.at("hfnu") - 100.0) < 1e-9;
    }
  }
  const double fs = 8.0;
  const auto one = features::sc_features({scr_trace(fs, 60, {20.0}, 0.3), fs});
  const auto two = features::sc_features({scr_trace(fs, 60, {10.0, 40.0}, 0.3), fs});
  const double mag_err = std::abs(one.at("sc_magnitude_sum") - 0.3) / 0.3;
  const bool scr_ok = one.at("sc_response_count") == 1 && two.at("sc_response_count") == 2 &&
                      mag_err <= kScrMagnitudeTol && std::abs(two.at("sc_magnitude_sum") - 0.6) / 0.6 <= kScrMagnitudeTol;
  const bool ok = mismatches == 0 && lf_share >= kBandShare && hf_share >= kBandShare && oracle_lf >= kBandShare &&
                  oracle_hf >= kBandShare && nu_ok && scr_ok;
  return {ok, "time-domain worst rel diff " + f(worst, 2) + " over 5 series; in-band share lf " + f(lf_share) +
                  " (DFT oracle " + f(oracle_lf) + "), hf " + f(hf_share) + " (DFT oracle " + f(oracle_hf) +
                  "); lfnu+hfnu=100 " + (nu_ok ? "holds" : "FAILS") + "; SCR counts " +
                  f(one.at("sc_response_count")) + "/" + f(two.at("sc_response_count")) + ", magnitude err " +
                  f(100 * mag_err, 3) + "%"};
}

// ---- 7. active sampling -------------------------------------------------------

config::ExperimentConfig load_cfg(const std::string& name) { return config::load_config(kSourceDir / "configs" / name); }

synth::SynthSpec load_spec(const std::string& name) {
  return synth::synth_spec_from_json(config::read_json_file(kSourceDir / "configs" / name));
}

Outcome active_sampling() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto spec = load_spec("synth_active.json");
  const auto cfg = load_cfg("active.json");
  eval::SweepOptions opt;
  opt.thresholds = cfg.thresholds;
  opt.seeds = cfg.seeds;
  opt.fold_count = cfg.folds;
  const auto res = eval::sweep_active_sampling(
      [&](std::uint64_t seed) {
        auto s = spec;
        s.seed = seed;
        return synth::generate(s).dataset;
      },
      cfg.resolved(spec.features), opt);
  const double secs = seconds_since(t0);

  // selections must be nested in the threshold: dense grid over one scored fold
  bool monotone = true;
  {
    auto s1 = spec;
    s1.seed = cfg.seeds.front();
    const auto ds = synth::generate(s1).dataset;
    const auto split = data::make_splits(ds, cfg.folds, {derive_seed(s1.seed, 0x5b1)});
    const auto tspec = cfg.resolved(ds.feature_count());
    const auto scaler = train::fit_fold_scaler(ds, split, 0, tspec.scaler_uses_unlabeled);
    const auto scores = train::score_unlabeled(ds, split, 0, tspec, scaler, {s1.seed});
    const double lo = scores.unlabeled_nll.minCoeff() - 1, hi = scores.unlabeled_nll.maxCoeff() + 1;
    std::set<std::size_t> prev;
    for (int k = 0; k <= 200; ++k) {
      const auto rep = active::select_by_scores(scores.labeled_nll, scores.unlabeled_nll, lo + (hi - lo) * k / 200.0);
      const std::set<std::size_t> cur(rep.selected.begin(), rep.selected.end());
      monotone = monotone && std::includes(cur.begin(), cur.end(), prev.begin(), prev.end());
      prev = cur;
    }
    monotone = monotone && prev.size() == static_cast<std::size_t>(scores.unlabeled_nll.size());
  }
  std::map<std::pair<std::uint64_t, int>, std::vector<std::pair<double, std::size_t>>> sizes;
  for (const auto& r : res.runs) {
    if (r.arm == "active") sizes[{r.seed, r.fold}].emplace_back(r.threshold, r.pool_size);
  }
  for (auto& [key, v] : sizes) {
    std::sort(v.begin(), v.end());
    for (std::size_t i = 1; i < v.size(); ++i) monotone = monotone && v[i].second >= v[i - 1].second;
  }
  // headline comparison: smallest threshold of the grid
  const auto& c = res.comparisons.front();
  double fa = 0, fr = 0, frac = 0;
  for (const auto& p : res.points) {
    if (p.threshold != c.threshold) continue;
    (p.arm == "active" ? fa : fr) = p.f1.mean;
    frac = p.frac_unlabeled;
  }
  std::string others;
  for (std::size_t i = 1; i < res.comparisons.size(); ++i) {
    others += " thr " + f(res.comparisons[i].threshold) + ": p=" + f(res.comparisons[i].active_vs_random.p_greater, 3);
  }
  const bool ok = monotone && opt.seeds.size() >= 10 && c.active_vs_random.p_greater < kAlpha && fa >= fr &&
                  secs < kActiveSeconds;
  return {ok, std::string("selection monotone ") + (monotone ? "yes" : "NO") + "; threshold " + f(c.threshold) +
                  " (selects " + f(100 * frac, 3) + "% of unlabeled): active f1 " + f(fa) + " vs random " + f(fr) +
                  ", paired one-sided p=" + f(c.active_vs_random.p_greater, 3) + " over " +
                  std::to_string(opt.seeds.size()) + " seeds;" + others + " (" + f(secs / 60, 3) + " min)"};
}

// ---- 8. ablation ordering ------------------------------------------------------------

Outcome ablation_ordering() {
  const auto t0 = std::chrono::steady_clock::now();
  const auto spec = load_spec("synth_ablation.json");
  const auto cfg = load_cfg("ablation.json");
  synth::AblationOptions opt;
  opt.methods = {train::Method::baseline, train::Method::da, train::Method::da_ae_cr};
  opt.seeds = cfg.seeds;
  const auto res = synth::run_ablation(spec, cfg, opt);
  const double secs = seconds_since(t0);
  const auto& b = res.per_seed.at("baseline");
  const auto& d = res.per_seed.at("da");
  const auto& c = res.per_seed.at("da_ae_cr");
  const auto da_vs_b = eval::paired_t_test(d, b);
  const auto c_vs_da = eval::paired_t_test(c, d);
  const double mb = eval::mean_std(b).mean, md = eval::mean_std(d).mean, mc = eval::mean_std(c).mean;
  const double gain = (mc - mb) / mb;
  const bool ok = spec.label_fraction <= 0.01 && opt.seeds.size() >= 10 && mb <= md && md <= mc &&
                  da_vs_b.p_greater < kAlpha && c_vs_da.p_greater < kAlpha && gain >= kMinRelGain &&
                  secs < kAblationSeconds;
  return {ok, "f1 baseline " + f(mb) + ", da " + f(md) + ", da_ae_cr " + f(mc) + " over " +
                  std::to_string(opt.seeds.size()) + " seeds; p(da>baseline)=" + f(da_vs_b.p_greater, 3) +
                  ", p(da_ae_cr>da)=" + f(c_vs_da.p_greater, 3) + "; gain over baseline " + f(100 * gain, 3) +
                  "% (" + f(secs / 60, 3) + " min)"};
}

// ---- 9. random baseline ----------------------------------------------------------------

double binom_pmf(int n, int k, double p) {
  return std::exp(std::lgamma(n + 1.0) - std::lgamma(k + 1.0) - std::lgamma(n - k + 1.0) + k * std::log(p) +
                  (n - k) * std::log1p(-p));
}

// Expected f1 of independent Bernoulli(q) guesses against P positives and N negatives.
double exact_chance_f1(double q, int pos, int neg) {
  double e = 0;
  for (int tp = 0; tp <= pos; ++tp) {
    for (int fp = 0; fp <= neg; ++fp) {
      const double den = 2.0 * tp + fp + (pos - tp);
      e += binom_pmf(pos, tp, q) * binom_pmf(neg, fp, q) * (den > 0 ? 2.0 * tp / den : 0.0);
    }
  }
  return e;
}

Outcome random_baseline() {
  struct Case {
    int train_pos, train_n, test_pos, test_n;
  };
  double worst = 0;
  for (const Case c : {Case{50, 100, 40, 80}, Case{30, 100, 8, 40}, Case{70, 100, 35, 50}, Case{12, 60, 5, 20}}) {
    std::vector<int> tr(c.train_n, 0), te(c.test_n, 0);
    std::fill(tr.begin(), tr.begin() + c.train_pos, 1);
    std::fill(te.begin(), te.begin() + c.test_pos, 1);
    const auto sim = eval::random_baseline(tr, te, {static_cast<std::uint64_t>(c.test_n)}, kChanceReps);
    const double q = static_cast<double>(c.train_pos) / c.train_n;
    worst = std::max(worst, std::abs(sim.mean - exact_chance_f1(q, c.test_pos, c.test_n - c.test_pos)));
  }
  return {worst <= kChanceTol, "max |simulated - analytic| = " + f(worst, 3) + " over 4 class balances at " +
                                   std::to_string(kChanceReps) + " repetitions"};
}

// ---- 10. saliency --------------------------------------------------------------------

Outcome saliency_horizon() {
  // One model per configured seed; the median guards against a lucky draw.
  const auto base = load_spec("synth_saliency.json");
  const auto cfg = load_cfg("saliency.json");
  const int T = base.steps;
  const double lo = std::ceil(T / 3.0) * base.step_minutes, hi = (T / 2.0) * base.step_minutes;
  std::vector<double> horizons, ratios;
  std::string per_seed;
  bool degenerate = false;
  for (std::uint64_t seed : cfg.seeds) {
    auto spec = base;
    spec.seed = seed;
    const auto gen = synth::generate(spec);
    const auto& ds = gen.dataset;
    const auto split = data::make_splits(ds, cfg.folds, {derive_seed(seed, 0x5b1)});
    const auto out = train::run_fold(ds, split, 0, cfg.resolved(ds.feature_count()), {seed});
    // every validation window, labeled or not
    std::vector<Mat> zs;
    for (std::size_t i : split.validation_windows(ds, 0)) zs.push_back(out.train.scaler.transform(ds.windows[i].features));
    std::vector<const Mat*> ptrs;
    for (const auto& z : zs) ptrs.push_back(&z);
    const auto map = saliency::average_saliency(out.train.model, ptrs, ds.feature_names, ds.step_minutes);
    degenerate = degenerate || map.degenerate;
    const std::set<int> sig_cols(gen.signature.begin(), gen.signature.end());
    double s_sum = 0, o_sum = 0;
    int s_n = 0, o_n = 0;
    for (int c = 0; c < spec.features; ++c) {
      const double m = map.values.col(c).mean();
      (sig_cols.count(c) ? s_sum : o_sum) += m;
      ++(sig_cols.count(c) ? s_n : o_n);
    }
    horizons.push_back(saliency::effective_horizon(map));
    ratios.push_back((s_sum / s_n) / (o_sum / o_n));
    per_seed += " " + f(horizons.back()) + "/" + f(ratios.back(), 3);
  }
  auto median = [](std::vector<double> v) {
    std::sort(v.begin(), v.end());
    const std::size_t n = v.size();
    return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
  };
  const double h = median(horizons), r = median(ratios);
  const bool ok = !degenerate && h >= lo && h <= hi && r >= kSaliencyRatio;
  return {ok, "median horizon " + f(h) + " min over " + std::to_string(cfg.seeds.size()) + " models (window " +
                  std::to_string(T * base.step_minutes) + " min, accepted " + f(lo) + ".." + f(hi) +
                  "); median signature/other saliency " + f(r, 3) + "; per model horizon/ratio:" + per_seed};
}

// ---- 11. CLI determinism --------------------------------------------------------------

int sh(const std::string& cmd) {
  return std::system((cmd + " > /dev/null 2>&1").c_str());
}

std::string slurp(const fs::path& p) {
  std::ifstream in(p, std::ios::binary);
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

bool run_pipeline(const fs::path& dir, std::string& failed) {
  fs::remove_all(dir);
  fs::create_directories(dir);
  const std::string cli = kCli.string();
  const std::string data = (kSourceDir / "tests" / "data").string();
  const std::string d = dir.string();
  const std::vector<std::string> steps{
      cli + " synth --spec " + data + "/tiny_synth.json --seed 5 --out " + d + "/ds",
      cli + " augment --dataset " + d + "/ds --config " + data + "/tiny_config.json --copies 2 --seed 3 --limit 6 --out " +
          d + "/aug",
      cli + " pretrain --dataset " + d + "/ds --spec " + data + "/tiny_config.json --seed 4 --out " + d +
          "/ae.ckpt --loss-curve " + d + "/ae_curve.csv --labeled-latents " + d + "/lat_l.csv --unlabeled-latents " +
          d + "/lat_u.csv",
      cli + " select --labeled-latents " + d + "/lat_l.csv --unlabeled-latents " + d +
          "/lat_u.csv --k-range 1:3 --threshold 5 --seed 2 --report " + d + "/select.csv",
      cli + " train --config " + data + "/tiny_config.json --dataset " + d + "/ds --fold 1 --seed 6 --out " + d +
          "/train",
      cli + " evaluate --checkpoint " + d + "/train/model.ckpt --dataset " + d + "/ds --report " + d + "/eval.csv",
      cli + " saliency --checkpoint " + d + "/train/model.ckpt --dataset " + d + "/ds --out " + d +
          "/saliency.csv --heatmap " + d + "/heatmap.csv",
      cli + " sweep --config " + data + "/tiny_config.json --synth " + data +
          "/tiny_synth.json --thresholds 4,8 --seeds 1..2 --folds-run 0 --out " + d + "/sweep",
      cli + " bench --spec " + data + "/tiny_synth.json --config " + data +
          "/tiny_config.json --methods baseline,da_cr --seeds 1..2 --folds-run 0 --out " + d + "/bench.csv --runs " +
          d + "/bench_runs.csv",
  };
  for (const auto& s : steps) {
    if (sh(s) != 0) {
      failed = s;
      return false;
    }
  }
  return true;
}

Outcome cli_determinism() {
  const fs::path root = fs::temp_directory_path() / "sslseq_acceptance_cli";
  std::string failed;
  if (!run_pipeline(root / "a", failed) || !run_pipeline(root / "b", failed)) {
    return {false, "pipeline step failed: " + failed};
  }
  long files = 0, differ = 0;
  std::string first;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    if (!e.is_regular_file()) continue;
    const auto rel = fs::relative(e.path(), root / "a");
    ++files;
    if (!fs::exists(root / "b" / rel) || slurp(e.path()) != slurp(root / "b" / rel)) {
      ++differ;
      if (first.empty()) first = rel.string();
    }
  }
  long csv = 0, ckpt = 0;
  for (const auto& e : fs::recursive_directory_iterator(root / "a")) {
    csv += e.path().extension() == ".csv";
    ckpt += e.path().extension() == ".ckpt";
  }
  fs::remove_all(root);
  return {differ == 0 && csv > 0 && ckpt > 0,
          std::to_string(files) + " files (" + std::to_string(csv) + " CSV, " + std::to_string(ckpt) +
              " checkpoints) across synth/augment/pretrain/select/train/evaluate/saliency/sweep/bench; " +
              std::to_string(differ) + " differ" + (first.empty() ? "" : " (first: " + first + ")")};
}

// ---- 12. leakage -------------------------------------------------------------------------

Outcome leakage_guard() {
  synth::SynthSpec s;
  s.participants = 15;
  s.windows_per_participant = 30;
  s.steps = 8;
  s.features = 3;
  s.label_fraction = 0.2;
  s.seed = 12;
  const auto ds = synth::generate(s).dataset;
  const auto split = data::make_splits(ds, 5, {3});
  train::TrainSpec t;
  t.method = train::Method::da_ae_cr;
  t.network = nn::NetworkSpec::preset("desk", 3);
  t.epochs = 2;
  t.batch_size = 8;
  t.weights.copies = 2;
  t.pretrain.epochs = 1;
  int clean = 0;
  long checked = 0;
  bool independent = true;
  for (int fold = 0; fold < 5; ++fold) {
    const auto r = train::run_fold(ds, split, fold, t, {static_cast<std::uint64_t>(fold)});
    clean += r.audit.clean();
    // independent recomputation: scaler from training-fold windows only
    std::vector<const Mat*> train_w;
    for (std::size_t i : split.train_windows(ds, fold)) train_w.push_back(&ds.windows[i].features);
    const auto ref = train::Scaler::fit(train_w);
    independent = independent && ref.mean.isApprox(r.train.scaler.mean, 1e-12) && ref.std.isApprox(r.train.scaler.std, 1e-12);
    for (std::size_t i : r.pretrain.pool) {
      ++checked;
      independent = independent && split.fold_of(ds.windows[i].participant_id) != fold;
    }
  }
  // the audit must also catch a planted leak
  train::LeakageAudit bad;
  bad.validation_participants = {"P000"};
  bad.scaler_participants = {"P000", "P001"};
  bad.scaler_matches_train_fold = true;
  const bool detects = !bad.clean();
  const bool ok = clean == 5 && independent && detects && checked > 0;
  return {ok, "audit clean in " + std::to_string(clean) + "/5 folds; scaler recomputed from training participants " +
                  (independent ? "matches" : "DIFFERS") + "; " + std::to_string(checked) +
                  " pretraining windows all outside their validation fold; planted leak " +
                  (detects ? "detected" : "MISSED")};
}

}  // namespace

int main(int argc, char** argv) {
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
      {"gradient correctness", gradients},
      {"reconstruction loss oracle", ae_loss_oracle},
      {"mixture NLL oracle and EM monotonicity", nll_oracle},
      {"composite loss reductions", composite_reductions},
      {"augmentation identities", augmentation_identities},
      {"feature oracles", feature_oracles},
      {"active sampling contract", active_sampling},
      {"ablation ordering", ablation_ordering},
      {"random baseline sanity", random_baseline},
      {"saliency horizon", saliency_horizon},
      {"CLI determinism", cli_determinism},
      {"leakage guard", leakage_guard},
  };
  std::set<int> only;
  for (int i = 1; i < argc; ++i) only.insert(std::atoi(argv[i]));
  int failed = 0;
  for (std::size_t i = 0; i < criteria.size(); ++i) {
    const int n = static_cast<int>(i) + 1;
    if (!only.empty() && !only.count(n)) continue;
    Outcome o;
    try {
      o = criteria[i].second();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    failed += !o.pass;
    std::cout << (o.pass ? "PASS" : "FAIL") << " [" << n << "] " << criteria[i].first << ": " << o.detail << std::endl;
  }
  return failed == 0 ? 0 : 1;
}
