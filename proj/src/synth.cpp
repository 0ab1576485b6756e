// SPDX-License-Identifier: Apache-2.0
#include "sslseq/synth.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <stdexcept>

namespace sslseq::synth {

namespace {
int T_third(int steps) { return steps / 3; }
}  // namespace

void SynthSpec::validate() const {
  if (participants < 1 || windows_per_participant < 1) throw std::invalid_argument("synth: counts must be >= 1");
  if (steps < 3 || features < 1) throw std::invalid_argument("synth: need T >= 3 and F >= 1");
  if (signature_features < 0 || signature_features > features) {
    throw std::invalid_argument("synth: signature_features must lie in [0, F]");
  }
  auto unit = [](double v) { return v >= 0 && v <= 1; };
  if (!unit(label_fraction) || !unit(contaminant_fraction) || !unit(stress_rate)) {
    throw std::invalid_argument("synth: fractions must lie in [0, 1]");
  }
  if (signal_strength < 0 || noise_floor < 0 || participant_offset_sd < 0 || contaminant_scale <= 0) {
    throw std::invalid_argument("synth: strengths and scales must be non-negative");
  }
  if (ramp_rise <= 0 || ramp_rise > 1) throw std::invalid_argument("synth: ramp_rise must lie in (0, 1]");
  if (gain_sd < 0 || onset_jitter < 0) throw std::invalid_argument("synth: gain_sd and onset_jitter must be >= 0");
  if (onset_jitter >= T_third(steps)) throw std::invalid_argument("synth: onset_jitter must be < T/3");
  if (std::abs(ar_coefficient) >= 1) throw std::invalid_argument("synth: |ar_coefficient| must be < 1");
  if (step_minutes < 1) throw std::invalid_argument("synth: step_minutes must be >= 1");
}

nlohmann::json to_json(const SynthSpec& s) {
  return {{"participants", s.participants},
          {"windows_per_participant", s.windows_per_participant},
          {"steps", s.steps},
          {"features", s.features},
          {"signature_features", s.signature_features},
          {"label_fraction", s.label_fraction},
          {"stress_rate", s.stress_rate},
          {"signal_strength", s.signal_strength},
          {"contaminant_fraction", s.contaminant_fraction},
          {"contaminant_shift", s.contaminant_shift},
          {"contaminant_scale", s.contaminant_scale},
          {"noise_floor", s.noise_floor},
          {"ar_coefficient", s.ar_coefficient},
          {"participant_offset_sd", s.participant_offset_sd},
          {"gain_sd", s.gain_sd},
          {"onset_jitter", s.onset_jitter},
          {"ramp_rise", s.ramp_rise},
          {"step_minutes", s.step_minutes},
          {"seed", s.seed}};
}

SynthSpec synth_spec_from_json(const nlohmann::json& j) {
  SynthSpec s;
  const auto defaults = to_json(s);
  for (const auto& [key, _] : j.items()) {
    if (!defaults.contains(key)) throw std::invalid_argument("synth spec: unknown key '" + key + "'");
  }
  s.participants = j.value("participants", s.participants);
  s.windows_per_participant = j.value("windows_per_participant", s.windows_per_participant);
  s.steps = j.value("steps", s.steps);
  s.features = j.value("features", s.features);
  s.signature_features = j.value("signature_features", s.signature_features);
  s.label_fraction = j.value("label_fraction", s.label_fraction);
  s.stress_rate = j.value("stress_rate", s.stress_rate);
  s.signal_strength = j.value("signal_strength", s.signal_strength);
  s.contaminant_fraction = j.value("contaminant_fraction", s.contaminant_fraction);
  s.contaminant_shift = j.value("contaminant_shift", s.contaminant_shift);
  s.contaminant_scale = j.value("contaminant_scale", s.contaminant_scale);
  s.noise_floor = j.value("noise_floor", s.noise_floor);
  s.ar_coefficient = j.value("ar_coefficient", s.ar_coefficient);
  s.participant_offset_sd = j.value("participant_offset_sd", s.participant_offset_sd);
  s.gain_sd = j.value("gain_sd", s.gain_sd);
  s.onset_jitter = j.value("onset_jitter", s.onset_jitter);
  s.ramp_rise = j.value("ramp_rise", s.ramp_rise);
  s.step_minutes = j.value("step_minutes", s.step_minutes);
  s.seed = j.value("seed", s.seed);
  s.validate();
  return s;
}

SynthResult generate(const SynthSpec& spec) {
  spec.validate();
  const int P = spec.participants;
  const int W = spec.windows_per_participant;
  const int T = spec.steps;
  const int F = spec.features;
  const std::size_t N = static_cast<std::size_t>(P) * static_cast<std::size_t>(W);

  SynthResult out;
  // Signature columns spread evenly across the feature axis.
  for (int k = 0; k < spec.signature_features; ++k) out.signature.push_back(k * F / spec.signature_features);

  // Exact labeled count; contaminants only among the unlabeled remainder.
  Rng pick(derive_seed(spec.seed, 0x5e1));
  std::vector<std::size_t> order(N);
  std::iota(order.begin(), order.end(), 0);
  shuffle(order, pick);
  const auto n_labeled = static_cast<std::size_t>(std::llround(spec.label_fraction * static_cast<double>(N)));
  const auto n_contam =
      static_cast<std::size_t>(std::llround(spec.contaminant_fraction * static_cast<double>(N - n_labeled)));
  std::vector<bool> labeled(N, false);
  out.contaminant.assign(N, false);
  for (std::size_t k = 0; k < n_labeled; ++k) labeled[order[k]] = true;
  for (std::size_t k = n_labeled; k < n_labeled + n_contam; ++k) out.contaminant[order[k]] = true;

  auto& ds = out.dataset;
  for (int f = 0; f < F; ++f) {
    char name[32];
    std::snprintf(name, sizeof name, "f%02d", f);
    ds.feature_names.emplace_back(name);
  }
  ds.step_minutes = spec.step_minutes;
  ds.rule = data::BinarizationRule::smile();
  ds.windows.reserve(N);
  out.stressed.reserve(N);

  const double phi = spec.ar_coefficient;
  const double innov = std::sqrt(1.0 - phi * phi);
  const int ramp_base = T - T_third(T);
  const data::Timestamp t0 = 1'600'000'000;
  const data::Timestamp window_span = static_cast<data::Timestamp>(T) * spec.step_minutes * 60;

  for (int p = 0; p < P; ++p) {
    Rng rng(derive_seed(spec.seed, 0x9a7, static_cast<std::uint64_t>(p)));
    Vec offset(F);
    for (int f = 0; f < F; ++f) offset(f) = rng.normal(0.0, spec.participant_offset_sd);
    char pid[32];
    std::snprintf(pid, sizeof pid, "P%03d", p);
    for (int w = 0; w < W; ++w) {
      const std::size_t idx = static_cast<std::size_t>(p) * static_cast<std::size_t>(W) + static_cast<std::size_t>(w);
      const bool contam = out.contaminant[idx];
      const bool stressed = rng.bernoulli(spec.stress_rate);
      const int level = stressed ? 2 + static_cast<int>(rng.index(6)) : 1;
      Mat x(T, F);
      for (int f = 0; f < F; ++f) {
        double s = rng.normal(0.0, 1.0);
        for (int t = 0; t < T; ++t) {
          if (t > 0) s = phi * s + innov * rng.normal(0.0, 1.0);
          x(t, f) = offset(f) + s + rng.normal(0.0, spec.noise_floor);
        }
      }
      // Nuisances, drawn before the label-dependent ramp.
      const double gain = spec.gain_sd > 0 ? std::exp(rng.normal(0.0, spec.gain_sd)) : 1.0;
      const int shift =
          spec.onset_jitter > 0 ? static_cast<int>(rng.index(2 * static_cast<std::size_t>(spec.onset_jitter) + 1)) - spec.onset_jitter : 0;
      const int ramp_start = ramp_base + shift;
      if (stressed) {
        // Amplitude grows with the self-reported level: 0.5x at level 2 to 1.5x at level 7.
        const double amp = spec.signal_strength * (0.5 + (level - 2) / 5.0);
        const int span = T - ramp_start;
        const double rise = std::max(1.0, std::round(spec.ramp_rise * span));
        for (int f : out.signature) {
          for (int t = ramp_start; t < T; ++t) {
            x(t, f) += amp * std::min(1.0, static_cast<double>(t - ramp_start + 1) / rise);
          }
        }
      }
      if (gain != 1.0) x *= gain;
      if (contam) {
        for (int f = 0; f < F; ++f) {
          const double sign = (f % 2 == 0) ? 1.0 : -1.0;
          x.col(f) = (x.col(f).array() - offset(f)) * spec.contaminant_scale + offset(f) + sign * spec.contaminant_shift;
        }
      }
      data::SequenceWindow win;
      win.participant_id = pid;
      win.t_end = t0 + static_cast<data::Timestamp>(w + 1) * window_span;
      win.features = std::move(x);
      if (labeled[idx]) {
        win.raw_level = level;
        win.label = data::binarize_level(level, ds.rule);
      }
      ds.windows.push_back(std::move(win));
      out.stressed.push_back(stressed);
    }
  }
  ds.reindex();
  return out;
}

}  // namespace sslseq::synth
