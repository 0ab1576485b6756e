// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sslseq/data.hpp"

#include <json.hpp>

#include <vector>

namespace sslseq::synth {

struct SynthSpec {
  int participants = 40;
  int windows_per_participant = 150;
  int steps = 24;     // T
  int features = 6;   // F
  int signature_features = 2;
  double label_fraction = 0.01;
  double stress_rate = 0.5;
  double signal_strength = 1.0;
  double contaminant_fraction = 0.0;
  double contaminant_shift = 3.0;
  double contaminant_scale = 2.0;
  double noise_floor = 0.3;
  double ar_coefficient = 0.8;
  double participant_offset_sd = 1.0;
  double gain_sd = 0.0;        // per-window log-normal sensor gain
  int onset_jitter = 0;        // ramp start varies by up to this many steps
  double ramp_rise = 1.0;      // share of the ramp span spent rising; flat after that
  int step_minutes = 5;
  std::uint64_t seed = 0;

  void validate() const;
};

nlohmann::json to_json(const SynthSpec& s);
SynthSpec synth_spec_from_json(const nlohmann::json& j);

struct SynthResult {
  data::Dataset dataset;
  std::vector<bool> stressed;     // ground truth for every window
  std::vector<bool> contaminant;
  std::vector<int> signature;     // feature columns carrying the planted ramp
};

/// AR(1) features with participant offsets; stressed windows get a ramp on
/// the signature features over the final third; contaminants are unlabeled
/// windows from a shifted, rescaled regime.
SynthResult generate(const SynthSpec& spec);

}  // namespace sslseq::synth
