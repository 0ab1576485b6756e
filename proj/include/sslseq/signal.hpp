// SPDX-License-Identifier: Apache-2.0
#pragma once

#include <span>
#include <vector>

namespace sslseq::signal {

/// Natural cubic spline through (x[i], y[i]); x strictly increasing.
class CubicSpline {
 public:
  CubicSpline(std::vector<double> x, std::vector<double> y);
  double operator()(double t) const;

 private:
  std::vector<double> x_, y_, m_;  // m_ = second derivatives at the knots
};

struct Psd {
  std::vector<double> freq;   // Hz
  std::vector<double> power;  // one-sided density, units^2 / Hz
};

/// Welch estimate with a periodic Hann window, per-segment
/// mean removal and density scaling. Segment length is clamped to the
/// signal length.
Psd welch(std::span<const double> x, double fs, std::size_t segment_length = 256, double overlap = 0.5);

/// Trapezoidal integral of the PSD over lo <= f < hi.
double band_power(const Psd& psd, double lo, double hi);

/// Second-order section in direct form: b0 b1 b2 / 1 a1 a2.
struct Biquad {
  double b0, b1, b2, a1, a2;
};

/// Butterworth band-pass as cascaded high-pass and low-pass sections of
/// order/2 each (order must be even, >= 2).
std::vector<Biquad> butterworth_bandpass(double lo_hz, double hi_hz, double fs, int order);
std::vector<Biquad> butterworth_lowpass(double cutoff_hz, double fs, int order);
std::vector<Biquad> butterworth_highpass(double cutoff_hz, double fs, int order);

std::vector<double> filter(const std::vector<Biquad>& sections, std::span<const double> x);
/// Zero-phase forward-backward filtering with odd reflection padding.
std::vector<double> filtfilt(const std::vector<Biquad>& sections, std::span<const double> x);

}  // namespace sslseq::signal
