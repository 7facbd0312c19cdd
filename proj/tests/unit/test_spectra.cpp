// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "freqfield/error.hpp"
#include "freqfield/spectra.hpp"
#include "test_oracles.hpp"

namespace freqfield {
namespace {

using testing::naive_dft;
using testing::naive_dft_complex;

constexpr double kPi = std::numbers::pi;

TEST(FrequencyGrid, BinLayout) {
  const FrequencyGrid g(4096, 48000.0);
  EXPECT_EQ(g.n_bins(), 2049u);
  EXPECT_EQ(g.bin_hz(0), 0.0);
  EXPECT_EQ(g.bin_hz(g.n_bins() - 1), 24000.0);
  EXPECT_DOUBLE_EQ(g.bin_hz(1), 48000.0 / 4096.0);

  const FrequencyGrid odd_rate(10, 7.0);
  EXPECT_EQ(odd_rate.bin_hz(5), 3.5);
}

TEST(FrequencyGrid, RejectsBadSizes) {
  EXPECT_THROW(FrequencyGrid(7, 1.0), InvalidInput);
  EXPECT_THROW(FrequencyGrid(6, 1.0), InvalidInput);
  EXPECT_THROW(FrequencyGrid(8, 0.0), InvalidInput);
  EXPECT_NO_THROW(FrequencyGrid(8, 1.0));
}

TEST(ForwardSpectrum, ImpulseAtZeroIsFlat) {
  const FrequencyGrid g(8, 8.0);
  std::vector<double> x(8, 0.0);
  x[0] = 1.0;
  const auto s = forward_spectrum(ImpulseResponse(g, x));
  for (const Complex& z : s.values) {
    EXPECT_EQ(z.real(), 1.0);
    EXPECT_EQ(z.imag(), 0.0);
  }
}

TEST(ForwardSpectrum, ShiftTheorem) {
  const FrequencyGrid g(64, 1000.0);
  const std::size_t d = 5;
  std::vector<double> x(64, 0.0);
  x[d] = 1.0;
  const auto s = forward_spectrum(ImpulseResponse(g, x));
  for (std::size_t i = 0; i < g.n_bins(); ++i) {
    EXPECT_NEAR(std::abs(s.values[i]), 1.0, 1e-12);
    const Complex expected = std::polar(1.0, -2.0 * kPi * static_cast<double>(i * d) / 64.0);
    EXPECT_NEAR(std::abs(s.values[i] - expected), 0.0, 1e-12) << "bin " << i;
  }
}

TEST(ForwardSpectrum, MatchesNaiveDft) {
  std::mt19937_64 rng(3);
  const FrequencyGrid g(96, 1.0);
  const auto x = testing::random_vector(96, rng);
  const auto fast = forward_spectrum(ImpulseResponse(g, x));
  const auto slow = naive_dft(x);
  for (std::size_t i = 0; i < slow.size(); ++i)
    EXPECT_NEAR(std::abs(fast.values[i] - slow[i]), 0.0, 1e-10);
}

TEST(ForwardSpectrum, LengthMismatch) {
  const FrequencyGrid g(16, 1.0);
  ImpulseResponse ir;
  ir.grid = g;
  ir.samples.assign(15, 0.0);
  EXPECT_THROW(forward_spectrum(ir), InvalidInput);
  EXPECT_THROW(ImpulseResponse(g, std::vector<double>(10)), InvalidInput);
}

TEST(InverseIr, RoundTrip4096) {
  std::mt19937_64 rng(11);
  const FrequencyGrid g(4096, 48000.0);
  const auto x = testing::random_vector(4096, rng);
  const auto back = inverse_ir(forward_spectrum(ImpulseResponse(g, x)));
  double num = 0.0, den = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    num += (back.samples[i] - x[i]) * (back.samples[i] - x[i]);
    den += x[i] * x[i];
  }
  EXPECT_LE(std::sqrt(num / den), 1e-9);
}

TEST(InverseIr, FlatSpectrumIsUnitImpulse) {
  const FrequencyGrid g(32, 1.0);
  ComplexSpectrum s(g, std::vector<Complex>(g.n_bins(), Complex(1.0, 0.0)));
  const auto ir = inverse_ir(s);
  EXPECT_NEAR(ir.samples[0], 1.0, 1e-14);
  for (std::size_t i = 1; i < ir.samples.size(); ++i) EXPECT_NEAR(ir.samples[i], 0.0, 1e-14);
}

TEST(InverseIr, ShiftedDelta) {
  const FrequencyGrid g(128, 1.0);
  ComplexSpectrum s(g);
  for (std::size_t i = 0; i < g.n_bins(); ++i)
    s.values[i] = std::polar(1.0, -2.0 * kPi * static_cast<double>(i * 17) / 128.0);
  const auto ir = inverse_ir(s);
  for (std::size_t i = 0; i < ir.samples.size(); ++i)
    EXPECT_NEAR(ir.samples[i], i == 17 ? 1.0 : 0.0, 1e-12);
}

TEST(InverseIr, FreeFieldPeakAtTimeOfFlight) {
  // Direct evaluation of (1/(4 pi r)) exp(-j 2 pi f r / v) at 3.43 m.
  const FrequencyGrid g(4096, 48000.0);
  ComplexSpectrum s(g);
  for (std::size_t i = 0; i < g.n_bins(); ++i)
    s.values[i] = std::polar(1.0 / (4.0 * kPi * 3.43), -2.0 * kPi * g.bin_hz(i) * 3.43 / 343.0);
  const auto ir = inverse_ir(s);
  const auto peak = std::max_element(ir.samples.begin(), ir.samples.end()) - ir.samples.begin();
  EXPECT_EQ(peak, 480);
}

TEST(Spectra, Parseval) {
  std::mt19937_64 rng(5);
  for (std::size_t n : {8u, 64u, 1000u, 4096u}) {
    const FrequencyGrid g(n, 1.0);
    const auto x = testing::random_vector(n, rng);
    const auto s = forward_spectrum(ImpulseResponse(g, x));
    double time = 0.0;
    for (double v : x) time += v * v;
    double freq = std::norm(s.values.front()) + std::norm(s.values.back());
    for (std::size_t i = 1; i + 1 < s.size(); ++i) freq += 2.0 * std::norm(s.values[i]);
    freq /= static_cast<double>(n);
    EXPECT_LE(std::abs(time - freq) / time, 1e-6) << "n = " << n;
  }
}

// Reference Hilbert transform: even extension, naive DFT, -j sgn(k) with a
// raised-cosine roll-off on the top lags, naive inverse.
std::vector<double> reference_hilbert(const std::vector<double>& profile, double taper) {
  const std::size_t nb = profile.size();
  const std::size_t n = 2 * (nb - 1);
  std::vector<testing::Cplx> ext(n);
  for (std::size_t i = 0; i < n; ++i) ext[i] = profile[i < nb ? i : n - i];
  auto spec = naive_dft_complex(ext, -1);
  const std::size_t half = n / 2;
  const auto roll = static_cast<std::size_t>(std::lround(taper * static_cast<double>(half)));
  for (std::size_t k = 0; k < n; ++k) {
    const std::size_t lag = k <= half ? k : n - k;
    double w = (lag == 0 || lag == half) ? 0.0 : 1.0;
    if (roll > 0 && lag > half - roll && lag < half)
      w = 0.5 * (1.0 + std::cos(kPi * static_cast<double>(lag - (half - roll)) /
                                static_cast<double>(roll)));
    const double sgn = k == 0 || k == half ? 0.0 : (k < half ? 1.0 : -1.0);
    spec[k] *= testing::Cplx(0.0, -sgn * w);
  }
  const auto back = naive_dft_complex(spec, +1);
  std::vector<double> out(nb);
  for (std::size_t i = 0; i < nb; ++i) out[i] = back[i].real() / static_cast<double>(n);
  return out;
}

TEST(HilbertKK, MatchesReferenceTransform) {
  std::mt19937_64 rng(8);
  const auto x = testing::random_vector(65, rng);
  for (double taper : {0.0, 0.1, 0.25}) {
    const auto fast = hilbert_kk(x, taper);
    const auto slow = reference_hilbert(x, taper);
    for (std::size_t i = 0; i < x.size(); ++i)
      EXPECT_NEAR(fast[i], slow[i], 1e-10) << "taper " << taper << " bin " << i;
  }
}

TEST(HilbertKK, ConstantMapsToZero) {
  const std::vector<double> c(257, 3.25);
  for (double taper : {0.0, 0.1, 0.5})
    for (double v : hilbert_kk(c, taper)) EXPECT_NEAR(v, 0.0, 1e-12);
}

TEST(HilbertKK, CosineToSine) {
  const std::size_t nb = 257;
  const std::size_t n_ext = 2 * (nb - 1);
  std::vector<double> c(nb);
  for (std::size_t i = 0; i < nb; ++i)
    c[i] = std::cos(2.0 * kPi * 3.0 * static_cast<double>(i) / static_cast<double>(n_ext));
  const auto h = hilbert_kk(c, 0.1);
  const std::size_t edge = 26;  // round(0.1 * 256) bins at each end
  double worst = 0.0;
  for (std::size_t i = edge; i < nb - edge; ++i) {
    const double s =
        std::sin(2.0 * kPi * 3.0 * static_cast<double>(i) / static_cast<double>(n_ext));
    worst = std::max(worst, std::abs(h[i] - s));
  }
  EXPECT_LE(worst, 1e-3);
}

TEST(HilbertKK, Linear) {
  std::mt19937_64 rng(21);
  const auto x = testing::random_vector(129, rng);
  const auto y = testing::random_vector(129, rng);
  const double a = 1.7, b = -0.3;
  std::vector<double> combo(x.size());
  for (std::size_t i = 0; i < x.size(); ++i) combo[i] = a * x[i] + b * y[i];
  const auto hx = hilbert_kk(x, 0.1), hy = hilbert_kk(y, 0.1), hc = hilbert_kk(combo, 0.1);
  for (std::size_t i = 0; i < x.size(); ++i) EXPECT_NEAR(hc[i], a * hx[i] + b * hy[i], 1e-12);
}

TEST(HilbertKK, RejectsBadTaper) {
  const std::vector<double> x(33, 1.0);
  EXPECT_THROW(hilbert_kk(x, -0.01), InvalidInput);
  EXPECT_THROW(hilbert_kk(x, 0.51), InvalidInput);
  EXPECT_THROW(hilbert_kk(std::vector<double>(4, 1.0), 0.1), InvalidInput);
}

TEST(SmoothLogEnvelope, ConstantMagnitude) {
  const FrequencyGrid g(64, 1.0);
  ComplexSpectrum s(g);
  for (std::size_t i = 0; i < g.n_bins(); ++i) s.values[i] = std::polar(0.3, 0.1 * i);
  const std::vector<double> w(g.n_bins(), 1.0);
  for (double v : smooth_log_envelope(s, w, 0.1, 1e-6)) EXPECT_NEAR(v, std::log(0.3 + 1e-6), 1e-12);
}

TEST(SmoothLogEnvelope, AlphaOneIsIdentity) {
  std::mt19937_64 rng(2);
  const FrequencyGrid g(64, 1.0);
  ComplexSpectrum s(g, testing::random_complex(g.n_bins(), rng));
  const auto w = testing::random_vector(g.n_bins(), rng, 0.0, 2.0);
  const auto out = smooth_log_envelope(s, w, 1.0, 1e-6);
  for (std::size_t i = 0; i < out.size(); ++i)
    EXPECT_EQ(out[i], std::log(std::abs(s.values[i]) * w[i] + 1e-6));
}

TEST(SmoothLogEnvelope, SpikeMatchesDirectRecurrence) {
  const std::size_t n = 41, spike = 20;
  const double alpha = 0.3;
  std::vector<double> e(n, 0.0);
  e[spike] = 1.0;
  const auto out = exp_smooth_zero_lag(e, alpha);

  // Closed form of both passes for a unit spike on a zero background.
  for (std::size_t i = 0; i < n; ++i) {
    const double fwd = i >= spike ? alpha * std::pow(1.0 - alpha, double(i - spike)) : 0.0;
    const double bwd = i <= spike ? alpha * std::pow(1.0 - alpha, double(spike - i)) : 0.0;
    EXPECT_NEAR(out[i], 0.5 * (fwd + bwd), 1e-12);
  }
  for (std::size_t i = spike; i + 1 < n; ++i) EXPECT_GT(out[i], out[i + 1]);
  for (std::size_t i = 1; i <= spike; ++i) EXPECT_GT(out[i], out[i - 1]);
}

TEST(SmoothLogEnvelope, PalindromeSymmetry) {
  std::mt19937_64 rng(4);
  auto half = testing::random_vector(16, rng);
  std::vector<double> pal(half);
  pal.push_back(0.7);
  pal.insert(pal.end(), half.rbegin(), half.rend());
  const auto out = exp_smooth_zero_lag(pal, 0.2);
  for (std::size_t i = 0; i < out.size(); ++i) EXPECT_NEAR(out[i], out[out.size() - 1 - i], 1e-13);
}

TEST(SmoothLogEnvelope, AdjointIdentity) {
  std::mt19937_64 rng(6);
  const auto x = testing::random_vector(50, rng);
  const auto y = testing::random_vector(50, rng);
  const auto ax = exp_smooth_zero_lag(x, 0.15);
  const auto aty = exp_smooth_zero_lag_adjoint(y, 0.15);
  double lhs = 0.0, rhs = 0.0;
  for (std::size_t i = 0; i < x.size(); ++i) {
    lhs += ax[i] * y[i];
    rhs += x[i] * aty[i];
  }
  EXPECT_NEAR(lhs, rhs, 1e-12);
}

TEST(SmoothLogEnvelope, ShapeAndParameterChecks) {
  const FrequencyGrid g(16, 1.0);
  ComplexSpectrum s(g);
  EXPECT_THROW(smooth_log_envelope(s, std::vector<double>(3, 1.0), 0.1, 1e-6), InvalidInput);
  const std::vector<double> w(g.n_bins(), 1.0);
  EXPECT_THROW(smooth_log_envelope(s, w, 0.0, 1e-6), InvalidInput);
  EXPECT_THROW(smooth_log_envelope(s, w, 0.1, 0.0), InvalidInput);
}

}  // namespace
}  // namespace freqfield
