// SPDX-License-Identifier: Apache-2.0
#include "sslseq/signal.hpp"

#include <doctest.h>

#include <cmath>
#include <complex>
#include <numbers>
#include <random>
#include <vector>

using namespace sslseq::signal;

namespace {

constexpr double kPi = std::numbers::pi;

// Plain averaged periodogram: complex DFT via std::polar, no tables.
std::vector<double> welch_oracle(const std::vector<double>& x, double fs, std::size_t len, std::size_t hop) {
  std::vector<double> w(len);
  double w2 = 0;
  for (std::size_t i = 0; i < len; ++i) {
    w[i] = std::pow(std::sin(kPi * double(i) / double(len)), 2);
    w2 += w[i] * w[i];
  }
  const std::size_t nf = len / 2 + 1;
  std::vector<double> out(nf, 0.0);
  std::size_t segs = 0;
  for (std::size_t s = 0; s + len <= x.size(); s += hop) {
    double mean = 0;
    for (std::size_t i = 0; i < len; ++i) mean += x[s + i];
    mean /= double(len);
    for (std::size_t k = 0; k < nf; ++k) {
      std::complex<double> acc = 0;
      for (std::size_t i = 0; i < len; ++i) {
        acc += (x[s + i] - mean) * w[i] * std::polar(1.0, -2 * kPi * double(k * i) / double(len));
      }
      double p = std::norm(acc) / (fs * w2);
      if (k > 0 && 2 * k != len) p *= 2;
      out[k] += p;
    }
    ++segs;
  }
  for (auto& p : out) p /= double(segs);
  return out;
}

std::complex<double> response(const std::vector<Biquad>& secs, double omega) {
  const auto z1 = std::polar(1.0, -omega);
  const auto z2 = z1 * z1;
  std::complex<double> h = 1.0;
  for (const auto& s : secs) h *= (s.b0 + s.b1 * z1 + s.b2 * z2) / (1.0 + s.a1 * z1 + s.a2 * z2);
  return h;
}

double butter_gain(double f, double fc, double fs, int order, bool high) {
  double r = std::tan(kPi * f / fs) / std::tan(kPi * fc / fs);
  if (high) r = 1.0 / r;
  return 1.0 / std::sqrt(1.0 + std::pow(r, 2 * order));
}

}  // namespace

TEST_CASE("welch matches a brute-force periodogram average") {
  std::mt19937_64 gen(7);
  std::normal_distribution<double> nd;
  std::vector<double> x(600);
  for (auto& v : x) v = nd(gen) + 0.5;
  for (std::size_t len : {64u, 65u, 256u}) {
    const auto psd = welch(x, 4.0, len, 0.5);
    const auto ref = welch_oracle(x, 4.0, len, len - len / 2);
    REQUIRE(psd.power.size() == ref.size());
    for (std::size_t k = 0; k < ref.size(); ++k) {
      CHECK(psd.power[k] == doctest::Approx(ref[k]).epsilon(1e-9).scale(1e-12));
      CHECK(psd.freq[k] == doctest::Approx(double(k) * 4.0 / double(len)));
    }
  }
}

TEST_CASE("welch segment length clamps to the signal length") {
  std::vector<double> x(50);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(0.3 * double(i));
  const auto psd = welch(x, 1.0, 256);
  CHECK(psd.freq.size() == 26);
  const auto ref = welch_oracle(x, 1.0, 50, 25);
  for (std::size_t k = 0; k < ref.size(); ++k) CHECK(psd.power[k] == doctest::Approx(ref[k]).scale(1e-12));
}

TEST_CASE("single-segment Parseval") {
  std::mt19937_64 gen(3);
  std::normal_distribution<double> nd;
  const std::size_t n = 128;
  const double fs = 10.0;
  std::vector<double> x(n);
  for (auto& v : x) v = nd(gen);
  const auto psd = welch(x, fs, n);
  double mean = 0;
  for (double v : x) mean += v;
  mean /= double(n);
  double energy = 0, w2 = 0;
  for (std::size_t i = 0; i < n; ++i) {
    const double w = std::pow(std::sin(kPi * double(i) / double(n)), 2);
    energy += std::pow((x[i] - mean) * w, 2);
    w2 += w * w;
  }
  double sum = 0;
  for (double p : psd.power) sum += p;
  CHECK(sum * fs / double(n) == doctest::Approx(energy / w2).epsilon(1e-10));
}

TEST_CASE("pure tone lands in its bin") {
  const double fs = 4.0;
  std::vector<double> x(1024);
  for (std::size_t i = 0; i < x.size(); ++i) x[i] = std::sin(2 * kPi * 0.25 * double(i) / fs);
  const auto psd = welch(x, fs);
  std::size_t best = 0;
  for (std::size_t k = 1; k < psd.power.size(); ++k)
    if (psd.power[k] > psd.power[best]) best = k;
  CHECK(psd.freq[best] == doctest::Approx(0.25));
  // mean-square of a unit sine is 1/2
  CHECK(band_power(psd, 0.0, 2.0) == doctest::Approx(0.5).epsilon(0.02));
}

TEST_CASE("band_power trapezoid on a flat density") {
  Psd psd;
  for (int k = 0; k <= 10; ++k) {
    psd.freq.push_back(0.1 * k);
    psd.power.push_back(2.0);
  }
  // bins 0.2 .. 0.5 included, 0.6 excluded
  CHECK(band_power(psd, 0.2, 0.6) == doctest::Approx(2.0 * 0.3));
  CHECK(band_power(psd, 0.25, 0.29) == 0.0);
}

TEST_CASE("welch rejects bad arguments") {
  std::vector<double> x(10, 1.0);
  CHECK_THROWS(welch(x, 0.0));
  CHECK_THROWS(welch(x, 1.0, 4, 1.0));
  CHECK_THROWS(welch(std::vector<double>{1.0}, 1.0));
}

TEST_CASE("cubic spline reproduces linear data and interpolates knots") {
  std::vector<double> xs{0.0, 0.7, 1.1, 2.5, 4.0};
  std::vector<double> lin, curvy;
  for (double v : xs) {
    lin.push_back(3.0 - 2.0 * v);
    curvy.push_back(std::sin(v));
  }
  CubicSpline s(xs, lin), c(xs, curvy);
  for (double t = 0.0; t <= 4.0; t += 0.05) CHECK(s(t) == doctest::Approx(3.0 - 2.0 * t).epsilon(1e-12).scale(1e-12));
  for (std::size_t i = 0; i < xs.size(); ++i) CHECK(c(xs[i]) == doctest::Approx(curvy[i]));
  CHECK_THROWS(CubicSpline({0.0, 0.0, 1.0}, {1.0, 2.0, 3.0}));
}

TEST_CASE("butterworth magnitude follows the bilinear prototype") {
  const double fs = 16.0;
  for (int order : {1, 2, 3, 4}) {
    const auto lp = butterworth_lowpass(2.1, fs, order);
    const auto hp = butterworth_highpass(0.16, fs, order);
    for (double f : {0.05, 0.16, 0.5, 1.0, 2.1, 3.0, 6.0}) {
      const double om = 2 * kPi * f / fs;
      CHECK(std::abs(response(lp, om)) == doctest::Approx(butter_gain(f, 2.1, fs, order, false)).epsilon(1e-9));
      CHECK(std::abs(response(hp, om)) == doctest::Approx(butter_gain(f, 0.16, fs, order, true)).epsilon(1e-9));
    }
    CHECK(std::abs(response(lp, 2 * kPi * 2.1 / fs)) == doctest::Approx(std::sqrt(0.5)));
  }
  const auto bp = butterworth_bandpass(0.16, 2.1, fs, 4);
  CHECK(bp.size() == 2);
  CHECK(std::abs(response(bp, 0.0)) == doctest::Approx(0.0).scale(1.0));
  CHECK_THROWS(butterworth_bandpass(0.16, 2.1, fs, 3));
  CHECK_THROWS(butterworth_lowpass(8.0, fs, 2));
}

TEST_CASE("filtfilt keeps constants and has zero phase") {
  const auto lp = butterworth_lowpass(1.0, 10.0, 4);
  std::vector<double> c(200, 3.5);
  for (double v : filtfilt(lp, c)) CHECK(v == doctest::Approx(3.5).epsilon(1e-9));
  const auto hp = butterworth_highpass(0.5, 10.0, 2);
  for (double v : filtfilt(hp, c)) CHECK(std::abs(v) < 1e-9);

  // a slow symmetric bump stays centred after low-pass filtering
  std::vector<double> bump(401);
  for (std::size_t i = 0; i < bump.size(); ++i) bump[i] = std::exp(-std::pow((double(i) - 200.0) / 30.0, 2));
  const auto y = filtfilt(lp, bump);
  std::size_t peak = 0;
  for (std::size_t i = 1; i < y.size(); ++i)
    if (y[i] > y[peak]) peak = i;
  CHECK(peak == 200);
  for (std::size_t i = 0; i < 150; ++i) CHECK(y[200 - i] == doctest::Approx(y[200 + i]).scale(1e-3));

  // one-directional filter delays the same bump
  const auto fwd = filter(lp, bump);
  std::size_t fpeak = 0;
  for (std::size_t i = 1; i < fwd.size(); ++i)
    if (fwd[i] > fwd[fpeak]) fpeak = i;
  CHECK(fpeak > 200);
}
