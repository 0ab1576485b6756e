// SPDX-License-Identifier: Apache-2.0
#include "sslseq/signal.hpp"

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>

namespace sslseq::signal {

CubicSpline::CubicSpline(std::vector<double> x, std::vector<double> y) : x_(std::move(x)), y_(std::move(y)) {
  const std::size_t n = x_.size();
  if (n < 2 || y_.size() != n) throw std::invalid_argument("CubicSpline: need >= 2 matching knots");
  for (std::size_t i = 1; i < n; ++i) {
    if (!(x_[i] > x_[i - 1])) throw std::invalid_argument("CubicSpline: knots must be strictly increasing");
  }
  m_.assign(n, 0.0);
  if (n == 2) return;
  // Thomas algorithm on the natural-spline system for interior second derivatives.
  std::vector<double> c(n, 0.0), d(n, 0.0);
  for (std::size_t i = 1; i + 1 < n; ++i) {
    const double h0 = x_[i] - x_[i - 1];
    const double h1 = x_[i + 1] - x_[i];
    const double a = h0;
    const double b = 2.0 * (h0 + h1);
    const double cc = h1;
    const double rhs = 6.0 * ((y_[i + 1] - y_[i]) / h1 - (y_[i] - y_[i - 1]) / h0);
    const double denom = b - a * c[i - 1];
    c[i] = cc / denom;
    d[i] = (rhs - a * d[i - 1]) / denom;
  }
  for (std::size_t i = n - 2; i >= 1; --i) {
    m_[i] = d[i] - c[i] * m_[i + 1];
    if (i == 1) break;
  }
}

double CubicSpline::operator()(double t) const {
  const std::size_t n = x_.size();
  std::size_t i;
  if (t <= x_.front()) {
    i = 0;
  } else if (t >= x_.back()) {
    i = n - 2;
  } else {
    i = static_cast<std::size_t>(std::upper_bound(x_.begin(), x_.end(), t) - x_.begin()) - 1;
  }
  const double h = x_[i + 1] - x_[i];
  const double a = (x_[i + 1] - t) / h;
  const double b = (t - x_[i]) / h;
  return a * y_[i] + b * y_[i + 1] + ((a * a * a - a) * m_[i] + (b * b * b - b) * m_[i + 1]) * h * h / 6.0;
}

Psd welch(std::span<const double> x, double fs, std::size_t segment_length, double overlap) {
  if (fs <= 0.0) throw std::invalid_argument("welch: sample rate must be > 0");
  if (x.size() < 2) throw std::invalid_argument("welch: need at least 2 samples");
  if (overlap < 0.0 || overlap >= 1.0) throw std::invalid_argument("welch: overlap must be in [0, 1)");
  const std::size_t len = std::min(segment_length, x.size());
  const std::size_t hop = std::max<std::size_t>(1, len - static_cast<std::size_t>(std::floor(len * overlap)));
  const std::size_t nfreq = len / 2 + 1;
  const double two_pi = 2.0 * std::numbers::pi;

  std::vector<double> window(len);
  double wsum2 = 0.0;
  for (std::size_t i = 0; i < len; ++i) {
    window[i] = 0.5 - 0.5 * std::cos(two_pi * static_cast<double>(i) / static_cast<double>(len));
    wsum2 += window[i] * window[i];
  }
  std::vector<double> cos_table(len), sin_table(len);
  for (std::size_t i = 0; i < len; ++i) {
    cos_table[i] = std::cos(two_pi * static_cast<double>(i) / static_cast<double>(len));
    sin_table[i] = std::sin(two_pi * static_cast<double>(i) / static_cast<double>(len));
  }

  Psd out;
  out.freq.resize(nfreq);
  out.power.assign(nfreq, 0.0);
  for (std::size_t k = 0; k < nfreq; ++k) out.freq[k] = static_cast<double>(k) * fs / static_cast<double>(len);

  std::vector<double> seg(len);
  std::size_t segments = 0;
  for (std::size_t start = 0; start + len <= x.size(); start += hop) {
    double mean = 0.0;
    for (std::size_t i = 0; i < len; ++i) mean += x[start + i];
    mean /= static_cast<double>(len);
    for (std::size_t i = 0; i < len; ++i) seg[i] = (x[start + i] - mean) * window[i];
    for (std::size_t k = 0; k < nfreq; ++k) {
      double re = 0.0, im = 0.0;
      std::size_t idx = 0;
      for (std::size_t i = 0; i < len; ++i) {
        re += seg[i] * cos_table[idx];
        im -= seg[i] * sin_table[idx];
        idx += k;
        if (idx >= len) idx -= len;
      }
      double p = (re * re + im * im) / (fs * wsum2);
      if (k != 0 && !(len % 2 == 0 && k == len / 2)) p *= 2.0;
      out.power[k] += p;
    }
    ++segments;
  }
  for (double& p : out.power) p /= static_cast<double>(segments);
  return out;
}

double band_power(const Psd& psd, double lo, double hi) {
  double total = 0.0;
  bool have_prev = false;
  double pf = 0.0, pp = 0.0;
  for (std::size_t k = 0; k < psd.freq.size(); ++k) {
    const double f = psd.freq[k];
    if (f < lo || f >= hi) continue;
    if (have_prev) total += 0.5 * (psd.power[k] + pp) * (f - pf);
    pf = f;
    pp = psd.power[k];
    have_prev = true;
  }
  return total;
}

namespace {

void check_design(double cutoff_hz, double fs, int order) {
  if (fs <= 0.0) throw std::invalid_argument("butterworth: sample rate must be > 0");
  if (cutoff_hz <= 0.0 || cutoff_hz >= fs / 2.0) {
    throw std::invalid_argument("butterworth: cutoff must lie in (0, fs/2)");
  }
  if (order < 1) throw std::invalid_argument("butterworth: order must be >= 1");
}

std::vector<Biquad> design(double cutoff_hz, double fs, int order, bool highpass) {
  check_design(cutoff_hz, fs, order);
  std::vector<Biquad> out;
  const double w0 = 2.0 * std::numbers::pi * cutoff_hz / fs;
  const double cw = std::cos(w0);
  for (int k = 0; k < order / 2; ++k) {
    const double theta = std::numbers::pi * (2.0 * k + order + 1.0) / (2.0 * order);
    const double q = -1.0 / (2.0 * std::cos(theta));
    const double alpha = std::sin(w0) / (2.0 * q);
    const double a0 = 1.0 + alpha;
    Biquad s;
    if (highpass) {
      s.b0 = (1.0 + cw) / 2.0 / a0;
      s.b1 = -(1.0 + cw) / a0;
      s.b2 = s.b0;
    } else {
      s.b0 = (1.0 - cw) / 2.0 / a0;
      s.b1 = (1.0 - cw) / a0;
      s.b2 = s.b0;
    }
    s.a1 = -2.0 * cw / a0;
    s.a2 = (1.0 - alpha) / a0;
    out.push_back(s);
  }
  if (order % 2 == 1) {
    const double kk = std::tan(w0 / 2.0);
    Biquad s{};
    if (highpass) {
      s.b0 = 1.0 / (1.0 + kk);
      s.b1 = -s.b0;
    } else {
      s.b0 = kk / (1.0 + kk);
      s.b1 = s.b0;
    }
    s.a1 = (kk - 1.0) / (kk + 1.0);
    out.push_back(s);
  }
  return out;
}

// Steady-state transposed direct-form-II states for a unit step input.
std::vector<std::array<double, 2>> step_states(const std::vector<Biquad>& sections) {
  std::vector<std::array<double, 2>> zi;
  double u = 1.0;
  for (const auto& s : sections) {
    const double gain = (s.b0 + s.b1 + s.b2) / (1.0 + s.a1 + s.a2);
    const double y = gain * u;
    const double s2 = s.b2 * u - s.a2 * y;
    const double s1 = s.b1 * u - s.a1 * y + s2;
    zi.push_back({s1, s2});
    u = y;
  }
  return zi;
}

std::vector<double> run(const std::vector<Biquad>& sections, std::span<const double> x,
                        std::vector<std::array<double, 2>> state) {
  std::vector<double> y(x.begin(), x.end());
  for (std::size_t k = 0; k < sections.size(); ++k) {
    const auto& s = sections[k];
    double z1 = state[k][0], z2 = state[k][1];
    for (double& v : y) {
      const double in = v;
      const double out = s.b0 * in + z1;
      z1 = s.b1 * in - s.a1 * out + z2;
      z2 = s.b2 * in - s.a2 * out;
      v = out;
    }
  }
  return y;
}

}  // namespace

std::vector<Biquad> butterworth_lowpass(double cutoff_hz, double fs, int order) {
  return design(cutoff_hz, fs, order, false);
}

std::vector<Biquad> butterworth_highpass(double cutoff_hz, double fs, int order) {
  return design(cutoff_hz, fs, order, true);
}

std::vector<Biquad> butterworth_bandpass(double lo_hz, double hi_hz, double fs, int order) {
  if (order < 2 || order % 2 != 0) throw std::invalid_argument("butterworth_bandpass: order must be even and >= 2");
  if (!(lo_hz < hi_hz)) throw std::invalid_argument("butterworth_bandpass: lo must be below hi");
  auto out = butterworth_highpass(lo_hz, fs, order / 2);
  auto lp = butterworth_lowpass(hi_hz, fs, order / 2);
  out.insert(out.end(), lp.begin(), lp.end());
  return out;
}

std::vector<double> filter(const std::vector<Biquad>& sections, std::span<const double> x) {
  return run(sections, x, std::vector<std::array<double, 2>>(sections.size(), {0.0, 0.0}));
}

std::vector<double> filtfilt(const std::vector<Biquad>& sections, std::span<const double> x) {
  const std::size_t n = x.size();
  if (n < 2) return {x.begin(), x.end()};
  const std::size_t pad = std::min(n - 1, 3 * (2 * sections.size() + 1));
  std::vector<double> ext;
  ext.reserve(n + 2 * pad);
  for (std::size_t i = pad; i >= 1; --i) ext.push_back(2.0 * x[0] - x[i]);
  ext.insert(ext.end(), x.begin(), x.end());
  for (std::size_t i = 1; i <= pad; ++i) ext.push_back(2.0 * x[n - 1] - x[n - 1 - i]);

  const auto unit = step_states(sections);
  auto scaled = [&](double v) {
    auto zi = unit;
    for (auto& z : zi) {
      z[0] *= v;
      z[1] *= v;
    }
    return zi;
  };
  auto fwd = run(sections, ext, scaled(ext.front()));
  std::reverse(fwd.begin(), fwd.end());
  auto bwd = run(sections, fwd, scaled(fwd.front()));
  std::reverse(bwd.begin(), bwd.end());
  return {bwd.begin() + static_cast<std::ptrdiff_t>(pad), bwd.begin() + static_cast<std::ptrdiff_t>(pad + n)};
}

}  // namespace sslseq::signal
