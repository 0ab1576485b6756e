// SPDX-License-Identifier: Apache-2.0
#include "sslseq/features.hpp"

#include "sslseq/signal.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace sslseq::features {

double FeatureRecord::at(const std::string& name) const {
  for (std::size_t i = 0; i < names.size(); ++i) {
    if (names[i] == name) return values[i];
  }
  throw std::out_of_range("no feature named '" + name + "'");
}

RrIngestResult ingest_rr(const std::vector<double>& intervals_ms, double t0) {
  RrIngestResult out;
  out.series.t0 = t0;
  for (double v : intervals_ms) {
    if (std::isfinite(v) && v >= 200.0 && v <= 3000.0) {
      out.series.intervals_ms.push_back(v);
    } else {
      ++out.dropped;
    }
  }
  return out;
}

void BandSpec::validate() const {
  for (const auto* b : {&vlf, &lf, &hf}) {
    if (!((*b)[0] >= 0.0 && (*b)[0] < (*b)[1])) throw std::invalid_argument("BandSpec: band bounds must be ordered");
  }
  if (vlf[1] > lf[0] || lf[1] > hf[0]) throw std::invalid_argument("BandSpec: bands must be ordered and disjoint");
}

namespace {

double mean_of(const std::vector<double>& v) {
  return std::accumulate(v.begin(), v.end(), 0.0) / static_cast<double>(v.size());
}

double std_of(const std::vector<double>& v, int ddof) {
  const double m = mean_of(v);
  double s = 0.0;
  for (double x : v) s += (x - m) * (x - m);
  return std::sqrt(s / static_cast<double>(v.size() - ddof));
}

double median_of(std::vector<double> v) {
  std::sort(v.begin(), v.end());
  const std::size_t n = v.size();
  return n % 2 ? v[n / 2] : 0.5 * (v[n / 2 - 1] + v[n / 2]);
}

}  // namespace

FeatureRecord hrv_time_features(const RrSeries& rr) {
  const auto& nn = rr.intervals_ms;
  if (nn.size() < 2) throw InsufficientDataError("hrv_time_features: need at least 2 RR intervals");
  for (double v : nn) {
    if (!(v > 0.0)) throw std::invalid_argument("hrv_time_features: RR intervals must be positive");
  }
  std::vector<double> diff(nn.size() - 1);
  for (std::size_t i = 1; i < nn.size(); ++i) diff[i - 1] = nn[i] - nn[i - 1];
  std::vector<double> hr(nn.size());
  std::transform(nn.begin(), nn.end(), hr.begin(), [](double v) { return 60000.0 / v; });

  const double mean_nni = mean_of(nn);
  const double sdnn = std_of(nn, 1);
  double sq = 0.0;
  for (double d : diff) sq += d * d;
  const double rmssd = std::sqrt(sq / static_cast<double>(diff.size()));
  const auto over = [&](double ms) {
    return static_cast<double>(std::count_if(diff.begin(), diff.end(), [&](double d) { return std::abs(d) > ms; }));
  };
  const double nni_50 = over(50.0);
  const double nni_20 = over(20.0);
  const double n_diffs = static_cast<double>(diff.size());
  const auto [mn, mx] = std::minmax_element(nn.begin(), nn.end());

  FeatureRecord r;
  r.add("mean_nni", mean_nni);
  r.add("sdnn", sdnn);
  r.add("sdsd", std_of(diff, 0));
  r.add("rmssd", rmssd);
  r.add("median_nni", median_of(nn));
  r.add("nni_50", nni_50);
  r.add("pnni_50", nni_50 / n_diffs);
  r.add("nni_20", nni_20);
  r.add("pnni_20", nni_20 / n_diffs);
  r.add("range_nni", *mx - *mn);
  r.add("cvsd", rmssd / mean_nni);
  r.add("cvnni", sdnn / mean_nni);
  r.add("mean_hr", mean_of(hr));
  r.add("max_hr", *std::max_element(hr.begin(), hr.end()));
  r.add("min_hr", *std::min_element(hr.begin(), hr.end()));
  r.add("std_hr", std_of(hr, 0));
  return r;
}

FreqFeatures hrv_freq_features(const RrSeries& rr, const BandSpec& bands, const FreqOptions& opt) {
  bands.validate();
  const auto& nn = rr.intervals_ms;
  if (nn.size() < 4) throw InsufficientDataError("hrv_freq_features: need at least 4 RR intervals");
  const double span_s = std::accumulate(nn.begin(), nn.end(), 0.0) / 1000.0;
  if (span_s < 30.0) throw InsufficientDataError("hrv_freq_features: RR series must span at least 30 s");

  // Tachogram: each interval is placed at the time its closing beat occurs.
  std::vector<double> t(nn.size());
  double acc = 0.0;
  for (std::size_t i = 0; i < nn.size(); ++i) {
    acc += nn[i] / 1000.0;
    t[i] = acc;
  }
  signal::CubicSpline spline(t, nn);
  const double step = 1.0 / opt.resample_hz;
  std::vector<double> grid;
  for (double x = t.front(); x <= t.back() + 1e-9; x += step) grid.push_back(spline(x));
  if (grid.size() < 2) throw InsufficientDataError("hrv_freq_features: resampled tachogram too short");
  const double m = mean_of(grid);
  for (double& v : grid) v -= m;

  const auto psd = signal::welch(grid, opt.resample_hz, opt.segment_length, opt.overlap);
  const double vlf = signal::band_power(psd, bands.vlf[0], bands.vlf[1]);
  const double lf = signal::band_power(psd, bands.lf[0], bands.lf[1]);
  const double hf = signal::band_power(psd, bands.hf[0], bands.hf[1]);
  const double total = signal::band_power(psd, 0.0, psd.freq.back() + 1.0);

  FreqFeatures out;
  // rounding leaves ~1e-30 ms^2 on a flat tachogram
  out.degenerate = !(lf + hf > 1e-10);
  out.record.add("total_power", total);
  out.record.add("vlf", vlf);
  out.record.add("lf", lf);
  out.record.add("hf", hf);
  out.record.add("lf_hf_ratio", hf > 0.0 ? lf / hf : 0.0);
  out.record.add("lfnu", out.degenerate ? 0.0 : 100.0 * lf / (lf + hf));
  out.record.add("hfnu", out.degenerate ? 0.0 : 100.0 * hf / (lf + hf));
  return out;
}

}  // namespace sslseq::features
