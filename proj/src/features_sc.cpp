// SPDX-License-Identifier: Apache-2.0
#include "sslseq/features.hpp"

#include "sslseq/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>
#include <sstream>

namespace sslseq::features {

namespace {

struct Filtered {
  std::vector<double> band;     // phasic band-pass
  std::vector<double> lowpass;  // band's upper edge only, keeps the tonic level
};

void check_sc(const ScSeries& sc, const ScOptions& opt) {
  const double min_rate = 2.0 * opt.band_hi_hz;
  if (!(sc.sample_rate_hz >= min_rate)) {
    std::ostringstream msg;
    msg << "sc_features: sample rate " << sc.sample_rate_hz << " Hz is below the required minimum of " << min_rate
        << " Hz";
    throw std::invalid_argument(msg.str());
  }
  const double duration = static_cast<double>(sc.samples_us.size()) / sc.sample_rate_hz;
  if (duration < opt.min_duration_s) {
    throw InsufficientDataError("sc_features: window shorter than " + std::to_string(opt.min_duration_s) + " s");
  }
  for (double v : sc.samples_us) {
    if (!std::isfinite(v)) throw std::invalid_argument("sc_features: non-finite sample");
  }
}

Filtered filter_sc(const ScSeries& sc, const ScOptions& opt) {
  const double fs = sc.sample_rate_hz;
  // At fs == 2 * band_hi the upper edge coincides with Nyquist and needs no section.
  const bool need_lp = opt.band_hi_hz < 0.999 * fs / 2.0;
  const int half = opt.filter_order / 2;
  if (opt.filter_order < 2 || opt.filter_order % 2 != 0) {
    throw std::invalid_argument("sc_features: filter order must be even and >= 2");
  }
  std::vector<signal::Biquad> lp;
  if (need_lp) lp = signal::butterworth_lowpass(opt.band_hi_hz, fs, half);
  auto band = signal::butterworth_highpass(opt.band_lo_hz, fs, half);
  band.insert(band.end(), lp.begin(), lp.end());
  Filtered f;
  f.band = signal::filtfilt(band, sc.samples_us);
  f.lowpass = need_lp ? signal::filtfilt(lp, sc.samples_us) : sc.samples_us;
  return f;
}

std::vector<ScResponse> detect(const Filtered& f, double fs, const ScOptions& opt) {
  const auto& bp = f.band;
  const auto& lp = f.lowpass;
  const std::size_t n = bp.size();
  std::vector<ScResponse> out;
  if (n < 3) return out;
  auto slope = [&](std::size_t i) { return (bp[i + 1] - bp[i]) * fs; };
  const std::size_t look = static_cast<std::size_t>(std::ceil(fs));
  std::size_t floor_idx = 0;  // responses may not reach back before the previous one ended

  std::size_t i = 1;
  while (i + 1 < n) {
    if (!(slope(i) > opt.onset_slope_us_per_s && slope(i - 1) <= opt.onset_slope_us_per_s)) {
      ++i;
      continue;
    }
    const std::size_t onset_bp = i;
    std::size_t peak_bp = onset_bp;
    while (peak_bp + 1 < n && bp[peak_bp + 1] > bp[peak_bp]) ++peak_bp;

    const std::size_t search_end = std::min(n - 1, peak_bp + 2 * look);
    std::size_t peak = onset_bp;
    for (std::size_t k = onset_bp; k <= search_end; ++k) {
      if (lp[k] > lp[peak]) peak = k;
    }
    const std::size_t search_begin = std::max(floor_idx, onset_bp > look ? onset_bp - look : 0);
    std::size_t onset = peak;
    for (std::size_t k = search_begin; k <= peak; ++k) {
      if (lp[k] < lp[onset]) onset = k;
    }
    const double magnitude = lp[peak] - lp[onset];
    if (magnitude >= opt.min_amplitude_us && onset < peak) {
      std::size_t recovery = n - 1;
      const double half_level = lp[peak] - magnitude / 2.0;
      for (std::size_t k = peak + 1; k < n; ++k) {
        if (lp[k] <= half_level) {
          recovery = k;
          break;
        }
      }
      out.push_back({onset, peak, recovery, magnitude});
      floor_idx = peak;
    }
    i = std::max(peak_bp, onset_bp) + 1;
  }
  return out;
}

}  // namespace

std::vector<ScResponse> detect_responses(const ScSeries& sc, const ScOptions& opt) {
  check_sc(sc, opt);
  return detect(filter_sc(sc, opt), sc.sample_rate_hz, opt);
}

FeatureRecord sc_features(const ScSeries& sc, const ScOptions& opt) {
  check_sc(sc, opt);
  const auto& x = sc.samples_us;
  const double fs = sc.sample_rate_hz;
  const std::size_t n = x.size();
  const auto filtered = filter_sc(sc, opt);
  const auto responses = detect(filtered, fs, opt);

  double phasic = 0.0;
  for (double v : filtered.band) phasic += v * v;
  phasic /= static_cast<double>(n);

  double second = 0.0;
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double d2 = x[i + 1] - 2.0 * x[i] + x[i - 1];
    second += d2 * d2;
  }
  second = n > 2 ? second / static_cast<double>(n - 2) : 0.0;

  double magnitude = 0.0, duration = 0.0, area = 0.0;
  for (const auto& r : responses) {
    magnitude += r.magnitude_us;
    duration += static_cast<double>(r.recovery - r.onset) / fs;
    const double base = filtered.lowpass[r.onset];
    for (std::size_t k = r.onset; k <= r.recovery; ++k) area += (filtered.lowpass[k] - base) / fs;
  }
  const double seconds = static_cast<double>(n) / fs;

  FeatureRecord rec;
  rec.add("sc_level", std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n));
  rec.add("sc_phasic_power", phasic);
  rec.add("sc_response_rate", static_cast<double>(responses.size()) / seconds);
  rec.add("sc_second_diff_power", second);
  rec.add("sc_response_count", static_cast<double>(responses.size()));
  rec.add("sc_magnitude_sum", magnitude);
  rec.add("sc_duration_sum", duration);
  rec.add("sc_area_sum", area);
  return rec;
}

}  // namespace sslseq::features
