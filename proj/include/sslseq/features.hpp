// SPDX-License-Identifier: Apache-2.0
#pragma once

#include "sslseq/common.hpp"

#include <array>
#include <map>
#include <string>
#include <vector>

namespace sslseq::features {

/// Named feature values in emission order.
struct FeatureRecord {
  std::vector<std::string> names;
  std::vector<double> values;

  double at(const std::string& name) const;
  void add(std::string name, double value) {
    names.push_back(std::move(name));
    values.push_back(value);
  }
};

/// Successive RR intervals in milliseconds. `t0` (seconds) stamps the first
/// beat; interval timing is implied by the cumulative sum.
struct RrSeries {
  std::vector<double> intervals_ms;
  double t0 = 0.0;
};

struct RrIngestResult {
  RrSeries series;
  std::size_t dropped = 0;
};

/// Applies the 200..3000 ms plausibility bound.
RrIngestResult ingest_rr(const std::vector<double>& intervals_ms, double t0 = 0.0);

struct BandSpec {
  std::array<double, 2> vlf{0.003, 0.04};
  std::array<double, 2> lf{0.04, 0.15};
  std::array<double, 2> hf{0.15, 0.40};

  void validate() const;
};

/// mean_nni sdnn sdsd rmssd median_nni nni_50 pnni_50 nni_20 pnni_20
/// range_nni cvsd cvnni mean_hr max_hr min_hr std_hr
FeatureRecord hrv_time_features(const RrSeries& rr);

struct FreqOptions {
  double resample_hz = 4.0;
  std::size_t segment_length = 256;
  double overlap = 0.5;
};

struct FreqFeatures {
  FeatureRecord record;  // total_power vlf lf hf lf_hf_ratio lfnu hfnu
  bool degenerate = false;  // lf + hf == 0
};

FreqFeatures hrv_freq_features(const RrSeries& rr, const BandSpec& bands = {}, const FreqOptions& opt = {});

struct ScSeries {
  std::vector<double> samples_us;
  double sample_rate_hz = 0.0;
};

struct ScOptions {
  double band_lo_hz = 0.16;
  double band_hi_hz = 2.1;
  int filter_order = 4;
  double onset_slope_us_per_s = 0.01;
  double min_amplitude_us = 0.05;
  double min_duration_s = 10.0;
};

struct ScResponse {
  std::size_t onset = 0;
  std::size_t peak = 0;
  std::size_t recovery = 0;  // half-recovery sample (or end of window)
  double magnitude_us = 0.0;
};

/// sc_level sc_phasic_power sc_response_rate sc_second_diff_power
/// sc_response_count sc_magnitude_sum sc_duration_sum sc_area_sum
FeatureRecord sc_features(const ScSeries& sc, const ScOptions& opt = {});
std::vector<ScResponse> detect_responses(const ScSeries& sc, const ScOptions& opt = {});

enum class EventKind { accel, app_use, call, sms, conversation, gps, screen };

EventKind parse_event_kind(const std::string& text);

/// Payload conventions per kind:
///   accel: values = {x, y, z}
///   app_use: app = package/app name
///   call: values = {type (1 out, 2 in), duration_s}
///   sms: values = {type}
///   conversation, screen: values = {duration_s}
///   gps: values = {lat_deg, lon_deg}
struct PhoneEvent {
  double time = 0.0;  // seconds
  EventKind kind = EventKind::accel;
  std::vector<double> values;
  std::string app;
};

struct PhoneEventLog {
  std::vector<PhoneEvent> events;  // non-decreasing time
};

/// app name -> category in {com, entertain, product, social, fit}.
using AppCategoryMap = std::map<std::string, std::string>;

AppCategoryMap read_app_map(const std::string& path);

double haversine_m(double lat1, double lon1, double lat2, double lon2);

/// Events with t_start <= time < t_end contribute.
FeatureRecord phone_features(const PhoneEventLog& log, double t_start, double t_end,
                             const AppCategoryMap& app_map = {});

}  // namespace sslseq::features
