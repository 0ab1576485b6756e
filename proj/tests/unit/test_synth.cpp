// SPDX-License-Identifier: Apache-2.0
#include "sslseq/config.hpp"
#include "sslseq/synth.hpp"

#include <doctest.h>

#include <cmath>
#include <set>

using namespace sslseq;

TEST_CASE("synthetic generator") {
  synth::SynthSpec s;
  s.participants = 6;
  s.windows_per_participant = 50;
  s.steps = 12;
  s.features = 4;
  s.label_fraction = 0.1;
  s.contaminant_fraction = 0.2;
  s.seed = 3;
  const auto r = synth::generate(s);
  const auto& ds = r.dataset;
  CHECK(ds.windows.size() == 300);
  CHECK(ds.labeled_index.size() == 30);
  CHECK(ds.unlabeled_index.size() == 270);
  CHECK(r.signature == std::vector<int>{0, 2});
  CHECK(ds.participants().size() == 6);
  long contam = 0;
  for (std::size_t i = 0; i < ds.windows.size(); ++i) {
    const auto& w = ds.windows[i];
    CHECK(w.features.rows() == 12);
    CHECK(w.features.cols() == 4);
    if (r.contaminant[i]) {
      ++contam;
      CHECK_FALSE(w.labeled());
    }
    if (w.labeled()) CHECK((*w.label == data::BinaryLabel::stressed) == r.stressed[i]);
  }
  CHECK(contam == 54);

  const auto again = synth::generate(s);
  for (std::size_t i = 0; i < ds.windows.size(); ++i) CHECK(again.dataset.windows[i].features == ds.windows[i].features);
  s.seed = 4;
  CHECK_FALSE(synth::generate(s).dataset.windows[0].features == ds.windows[0].features);
}

TEST_CASE("planted ramp sits in the final third of signature columns") {
  synth::SynthSpec s;
  s.participants = 4;
  s.windows_per_participant = 400;
  s.steps = 12;
  s.features = 3;
  s.signature_features = 1;
  s.signal_strength = 4.0;
  s.seed = 1;
  const auto r = synth::generate(s);
  // mean stressed minus non-stressed, per cell
  Mat diff = Mat::Zero(12, 3);
  long ns = 0, nn_ = 0;
  Mat a = Mat::Zero(12, 3), b = Mat::Zero(12, 3);
  for (std::size_t i = 0; i < r.stressed.size(); ++i) {
    if (r.stressed[i]) {
      a += r.dataset.windows[i].features;
      ++ns;
    } else {
      b += r.dataset.windows[i].features;
      ++nn_;
    }
  }
  diff = a / double(ns) - b / double(nn_);
  for (int t = 0; t < 12; ++t) {
    for (int f = 0; f < 3; ++f) {
      if (f == 0 && t >= 8) {
        CHECK(diff(t, f) > 0.5);
      } else {
        CHECK(std::abs(diff(t, f)) < 0.3);
      }
    }
  }
}

TEST_CASE("nuisance knobs: ramp rise, onset jitter, window gain") {
  synth::SynthSpec s;
  s.participants = 3;
  s.windows_per_participant = 60;
  s.steps = 12;
  s.features = 2;
  s.signature_features = 1;
  s.label_fraction = 1.0;
  s.seed = 9;
  // The ramp consumes no random draws, so signal minus no-signal isolates it.
  auto ramp_of = [](synth::SynthSpec spec) {
    auto with = synth::generate(spec);
    spec.signal_strength = 0.0;
    const auto without = synth::generate(spec);
    std::vector<Mat> d;
    for (std::size_t i = 0; i < with.dataset.windows.size(); ++i) {
      d.push_back(with.dataset.windows[i].features - without.dataset.windows[i].features);
    }
    return std::make_pair(with, d);
  };

  SUBCASE("fast rise plateaus at full amplitude") {
    s.signal_strength = 2.0;
    s.ramp_rise = 0.5;  // span 4 steps, rises over 2
    const auto [gen, d] = ramp_of(s);
    for (std::size_t i = 0; i < d.size(); ++i) {
      const double amp = gen.stressed[i] ? 2.0 * (0.5 + (*gen.dataset.windows[i].raw_level - 2) / 5.0) : 0.0;
      CHECK(d[i].col(1).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(d[i].col(0).head(8).cwiseAbs().maxCoeff() < 1e-12);
      CHECK(d[i](8, 0) == doctest::Approx(amp / 2));
      for (int t = 9; t < 12; ++t) CHECK(d[i](t, 0) == doctest::Approx(amp));
    }
  }
  SUBCASE("onset jitter moves the ramp start within bounds") {
    s.signal_strength = 2.0;
    s.onset_jitter = 2;
    const auto [gen, d] = ramp_of(s);
    std::set<int> starts;
    for (std::size_t i = 0; i < d.size(); ++i) {
      if (!gen.stressed[i]) continue;
      int t0 = 0;
      while (t0 < 12 && d[i](t0, 0) == 0.0) ++t0;
      starts.insert(t0);
    }
    CHECK(starts == std::set<int>{6, 7, 8, 9, 10});
  }
  SUBCASE("gain rescales the whole window") {
    s.ar_coefficient = 0.5;
    auto plain = synth::generate(s);
    s.gain_sd = 0.4;
    auto gained = synth::generate(s);
    // first window: same draws up to the gain
    const Mat& a = plain.dataset.windows[0].features;
    const Mat& b = gained.dataset.windows[0].features;
    const double g = b(0, 0) / a(0, 0);
    CHECK(g > 0);
    CHECK((b - g * a).cwiseAbs().maxCoeff() < 1e-12);
  }
  SUBCASE("validation") {
    s.ramp_rise = 0.0;
    CHECK_THROWS(synth::generate(s));
    s.ramp_rise = 1.0;
    s.onset_jitter = 4;
    CHECK_THROWS(synth::generate(s));
    s.onset_jitter = 0;
    s.gain_sd = -0.1;
    CHECK_THROWS(synth::generate(s));
  }
}

TEST_CASE("synth spec json") {
  synth::SynthSpec s;
  s.participants = 7;
  s.contaminant_fraction = 0.25;
  s.gain_sd = 0.3;
  s.onset_jitter = 2;
  s.ramp_rise = 0.5;
  const auto back = synth::synth_spec_from_json(synth::to_json(s));
  CHECK(synth::to_json(back) == synth::to_json(s));
  CHECK_THROWS(synth::synth_spec_from_json({{"participantz", 3}}));
  CHECK_THROWS(synth::synth_spec_from_json({{"ar_coefficient", 1.0}}));
  CHECK_THROWS(synth::synth_spec_from_json({{"signature_features", 9}}));
}

TEST_CASE("experiment config") {
  const nlohmann::json j = {{"method", "da_ae_cr"},
                            {"network", "smile"},
                            {"loss_weights", {{"alpha", 0.5}, {"lambda", 2.0}, {"M", 3}}},
                            {"augmentation", {{"jitter_sigma", 0.05}, {"time_warp", {{"sigma", 0.1}}}}},
                            {"active", {{"threshold", 4.5}, {"gmm_space", "pca:3"}}},
                            {"folds", 4},
                            {"seeds", {1, 2, 3}}};
  const auto c = config::config_from_json(j);
  CHECK(c.train.method == train::Method::da_ae_cr);
  CHECK(c.train.learning_rate == 1e-4);
  CHECK(c.train.weights.copies == 3);
  CHECK(c.train.augmentation.copies == 3);
  CHECK(c.train.augmentation.jitter_sigma == 0.05);
  CHECK(c.train.augmentation.tw_sigma == 0.1);
  CHECK(c.train.gmm_space.str() == "pca:3");
  CHECK(c.seeds.size() == 3);
  const auto spec = c.resolved(9);
  CHECK(spec.network.input_dim == 9);
  CHECK(spec.network.lstm_layers.size() == 3);
  CHECK(spec.network.lstm_layers[0].units == 64);

  const auto round = config::config_from_json(config::to_json(c));
  CHECK(config::to_json(round) == config::to_json(c));

  CHECK_THROWS(config::config_from_json({{"epoch", 3}}));
  CHECK_THROWS(config::config_from_json({{"folds", 1}}));
  CHECK_THROWS(config::config_from_json({{"method", "nope"}}));
  CHECK_THROWS(config::config_from_json({{"loss_weights", {{"beta", 1}}}}));
  CHECK_THROWS(config::config_from_json({{"augmentation", {{"scale_per", "row"}}}}));
}
