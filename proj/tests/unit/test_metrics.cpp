// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>
#include <random>

#include "freqfield/config_io.hpp"
#include "freqfield/error.hpp"
#include "freqfield/metrics.hpp"
#include "test_oracles.hpp"

namespace freqfield {
namespace {

constexpr double kPi = std::numbers::pi;

ComplexSpectrum random_spectrum(const FrequencyGrid& g, std::mt19937_64& rng) {
  ComplexSpectrum s(g, testing::random_complex(g.n_bins(), rng));
  s.values.front() = s.values.front().real();
  s.values.back() = s.values.back().real();
  return s;
}

double cos_sin_error(Complex a, Complex b) {
  const double ta = std::abs(a) < 1e-12 ? 0.0 : std::atan2(a.imag(), a.real());
  const double tb = std::abs(b) < 1e-12 ? 0.0 : std::atan2(b.imag(), b.real());
  return std::abs(std::cos(ta) - std::cos(tb)) + std::abs(std::sin(ta) - std::sin(tb));
}

// Two-pass exponential smoother written from its definition.
std::vector<double> zero_lag(const std::vector<double>& x, double a) {
  const std::size_t n = x.size();
  std::vector<double> f(n), b(n), out(n);
  for (std::size_t i = 0; i < n; ++i) f[i] = i == 0 ? x[0] : a * x[i] + (1 - a) * f[i - 1];
  for (std::size_t i = n; i-- > 0;) b[i] = i == n - 1 ? x[i] : a * x[i] + (1 - a) * b[i + 1];
  for (std::size_t i = 0; i < n; ++i) out[i] = 0.5 * (f[i] + b[i]);
  return out;
}

double naive_stft_distance(const std::vector<double>& a, const std::vector<double>& b) {
  double sum = 0.0;
  for (std::size_t win : {256u, 512u, 1024u}) {
    double total = 0.0;
    std::size_t count = 0;
    for (std::size_t start = 0; start < a.size(); start += win / 4) {
      std::vector<double> fa(win, 0.0), fb(win, 0.0);
      for (std::size_t i = 0; i < win && start + i < a.size(); ++i) {
        const double w =
            0.5 - 0.5 * std::cos(2.0 * kPi * static_cast<double>(i) / static_cast<double>(win));
        fa[i] = a[start + i] * w;
        fb[i] = b[start + i] * w;
      }
      const auto sa = testing::naive_dft(fa);
      const auto sb = testing::naive_dft(fb);
      for (std::size_t k = 0; k < sa.size(); ++k) {
        total += std::abs(std::log(std::abs(sa[k]) + 1e-8) - std::log(std::abs(sb[k]) + 1e-8));
      }
      count += sa.size();
    }
    sum += total / static_cast<double>(count);
  }
  return sum / 3.0;
}

TEST(EvalPair, IdenticalIsZero) {
  std::mt19937_64 rng(1);
  const FrequencyGrid g(512, 16000.0);
  const auto a = random_spectrum(g, rng);
  const PairMetrics m = eval_pair(a, a);
  EXPECT_EQ(m.amp, 0.0);
  EXPECT_EQ(m.ang, 0.0);
  EXPECT_EQ(m.spec, 0.0);
  EXPECT_EQ(m.energy, 0.0);
  EXPECT_EQ(m.env, 0.0);
  EXPECT_EQ(m.stft, 0.0);
}

TEST(EvalPair, DoubledPrediction) {
  std::mt19937_64 rng(2);
  const FrequencyGrid g(512, 16000.0);
  const auto a = random_spectrum(g, rng);
  auto b = a;
  for (auto& z : b.values) z *= 2.0;
  double mean_abs = 0.0;
  for (const auto& z : a.values) mean_abs += std::abs(z);
  mean_abs /= 257.0;
  const PairMetrics m = eval_pair(a, b);
  EXPECT_NEAR(m.amp, mean_abs, 1e-14);
  EXPECT_NEAR(m.ang, 0.0, 1e-14);
  EXPECT_NEAR(m.energy, 3.0, 1e-13);
}

TEST(EvalPair, MatchesElementwiseReevaluation) {
  std::mt19937_64 rng(3);
  const FrequencyGrid g(512, 16000.0);
  const auto a = random_spectrum(g, rng);
  const auto b = random_spectrum(g, rng);
  double amp = 0, ang = 0, spec = 0, ea = 0, eb = 0;
  std::vector<double> la(257), lb(257);
  for (std::size_t i = 0; i < 257; ++i) {
    const Complex x = a.values[i], y = b.values[i];
    amp += std::abs(std::abs(x) - std::abs(y));
    ang += cos_sin_error(x, y);
    spec += std::abs(x.real() - y.real()) + std::abs(x.imag() - y.imag());
    ea += std::norm(x);
    eb += std::norm(y);
    la[i] = std::log(std::abs(x) + 1e-6);
    lb[i] = std::log(std::abs(y) + 1e-6);
  }
  const auto sa = zero_lag(la, 0.1), sb = zero_lag(lb, 0.1);
  double env = 0.0;
  for (std::size_t i = 0; i < 257; ++i) env += std::abs(sa[i] - sb[i]);
  const PairMetrics m = eval_pair(a, b);
  EXPECT_NEAR(m.amp, amp / 257, 1e-12);
  EXPECT_NEAR(m.ang, ang / 257, 1e-12);
  EXPECT_NEAR(m.spec, spec / 257, 1e-12);
  EXPECT_NEAR(m.energy, std::abs(ea - eb) / ea, 1e-12);
  EXPECT_NEAR(m.env, env / 257, 1e-12);
  const double stft = naive_stft_distance(real_ir(a).samples, real_ir(b).samples);
  EXPECT_NEAR(m.stft, stft, 1e-9 * stft);
  EXPECT_GT(m.stft, 0.0);
}

TEST(EvalPair, Errors) {
  const ComplexSpectrum a(FrequencyGrid(64, 1000.0));
  const ComplexSpectrum b(FrequencyGrid(128, 1000.0));
  EXPECT_THROW(eval_pair(a, b), InvalidInput);
  EXPECT_THROW(eval_pair(a, a), InvalidInput);  // zero reference energy
}

ImpulseResponse exponential_ir(double tau, std::size_t n = 8192, double sr = 16000.0) {
  // Energy envelope exp(-t / tau).
  std::vector<double> h(n);
  for (std::size_t i = 0; i < n; ++i) h[i] = std::exp(-0.5 * static_cast<double>(i) / sr / tau);
  return ImpulseResponse(FrequencyGrid(n, sr), h);
}

TEST(Reverberation, ExponentialDecay) {
  const double tau = 0.02;
  const ReverbTimes t = reverberation_times(exponential_ir(tau));
  ASSERT_TRUE(t.t60.has_value());
  ASSERT_TRUE(t.edt.has_value());
  EXPECT_NEAR(*t.t60, std::log(1e6) * tau, 0.02 * std::log(1e6) * tau);
  EXPECT_NEAR(*t.edt, std::log(1e6) * tau, 0.02 * std::log(1e6) * tau);
}

TEST(Reverberation, RelativeErrors) {
  const auto truth = exponential_ir(0.02);
  const ReverbErrors same = reverberation_metrics(truth, truth);
  EXPECT_EQ(*same.t60, 0.0);
  EXPECT_EQ(*same.edt, 0.0);
  const ReverbErrors fast = reverberation_metrics(truth, exponential_ir(0.01));
  EXPECT_NEAR(*fast.t60, 0.5, 0.01);
  EXPECT_NEAR(*fast.edt, 0.5, 0.01);
  auto scaled = truth;
  for (double& x : scaled.samples) x *= 37.0;
  const ReverbErrors s = reverberation_metrics(truth, scaled);
  EXPECT_NEAR(*s.t60, 0.0, 1e-9);
  EXPECT_NEAR(*s.edt, 0.0, 1e-9);
}

TEST(Reverberation, UnreachedDecayIsUnavailable) {
  std::vector<double> h(1024, 0.0);
  h[0] = 1.0;
  const ReverbTimes t = reverberation_times(ImpulseResponse(FrequencyGrid(1024, 16000.0), h));
  EXPECT_FALSE(t.t60.has_value());
  EXPECT_FALSE(t.edt.has_value());
  // Flat 16-sample response: the integrated tail only falls 12 dB.
  const ImpulseResponse slow(FrequencyGrid(16, 16000.0), std::vector<double>(16, 1.0));
  EXPECT_FALSE(reverberation_times(slow).t60.has_value());
  EXPECT_FALSE(reverberation_metrics(slow, slow).t60.has_value());
  EXPECT_THROW(schroeder_curve_db(ImpulseResponse(FrequencyGrid(16, 1.0), std::vector<double>(16))),
               InvalidInput);
}

TEST(Schroeder, CurveStartsAtZeroAndFalls) {
  const auto edc = schroeder_curve_db(exponential_ir(0.05, 1024));
  EXPECT_EQ(edc[0], 0.0);
  for (std::size_t i = 1; i < edc.size(); ++i) EXPECT_LE(edc[i], edc[i - 1]);
}

TEST(PerBand, HandBuiltThreeBinBand) {
  const FrequencyGrid g(64, 640.0);  // 10 Hz bins
  ComplexSpectrum a(g), b(g);
  for (std::size_t i = 0; i < g.n_bins(); ++i) a.values[i] = b.values[i] = 1.0;
  b.values[9] = 3.0;                  // mag error 2, phase 0
  b.values[10] = Complex(0.0, 1.0);   // mag 0, phase |1-0| + |0-1| = 2
  b.values[11] = Complex(-0.5, 0.0);  // mag 0.5, phase 2
  const auto bands = per_band_errors(a, b, {100.0}, 25.0);
  ASSERT_EQ(bands.size(), 1u);
  EXPECT_EQ(bands[0].n_bins, 3u);
  EXPECT_NEAR(*bands[0].mag_err, (2.0 + 0.0 + 0.5) / 3.0, 1e-15);
  EXPECT_NEAR(*bands[0].phase_err, (0.0 + 2.0 + 2.0) / 3.0, 1e-15);
}

TEST(PerBand, UnavailableSortedAndCovering) {
  std::mt19937_64 rng(4);
  const FrequencyGrid g(512, 16000.0);
  const auto a = random_spectrum(g, rng);
  const auto b = random_spectrum(g, rng);
  const auto bands = per_band_errors(a, b, {20000.0, 360.0, 180.0});
  ASSERT_EQ(bands.size(), 3u);
  EXPECT_EQ(bands[0].center_hz, 180.0);
  EXPECT_EQ(bands[2].center_hz, 20000.0);
  EXPECT_FALSE(bands[2].mag_err.has_value());
  EXPECT_TRUE(bands[0].mag_err.has_value());
  const auto zero = per_band_errors(a, a, kDefaultBandCenters);
  for (const auto& band : zero) {
    EXPECT_EQ(*band.mag_err, 0.0);
    EXPECT_EQ(*band.phase_err, 0.0);
  }
  const auto all = per_band_errors(a, b, {4000.0}, 9000.0);
  const PairMetrics m = eval_pair(a, b);
  EXPECT_EQ(all[0].n_bins, 257u);
  EXPECT_NEAR(*all[0].mag_err, m.amp, 1e-12);
  EXPECT_NEAR(*all[0].phase_err, m.ang, 1e-12);
  EXPECT_THROW(per_band_errors(a, b, {100.0}, 0.0), InvalidInput);
}

TEST(PerBand, ThirdOctaveDefaultWidth) {
  const FrequencyGrid g(512, 16000.0);  // 31.25 Hz bins
  ComplexSpectrum a(g, std::vector<Complex>(257, 1.0));
  const auto bands = per_band_errors(a, a, {720.0});
  // 720 / 2^(1/6) = 641.4 Hz to 720 * 2^(1/6) = 808.2 Hz: bins 21..25.
  EXPECT_EQ(bands[0].n_bins, 5u);
}

TEST(Evaluate, AveragesAndReports) {
  std::mt19937_64 rng(5);
  const FrequencyGrid g(512, 16000.0);
  std::vector<ComplexSpectrum> truth, pred;
  for (int k = 0; k < 3; ++k) {
    truth.push_back(random_spectrum(g, rng));
    pred.push_back(random_spectrum(g, rng));
  }
  const EvalReport r = evaluate(truth, pred);
  double amp = 0.0;
  for (int k = 0; k < 3; ++k) amp += eval_pair(truth[k], pred[k]).amp;
  EXPECT_NEAR(r.amp_err, amp / 3.0, 1e-14);
  EXPECT_EQ(r.n_receivers, 3u);
  ASSERT_EQ(r.per_band.size(), 5u);
  for (std::size_t b = 1; b < r.per_band.size(); ++b) {
    EXPECT_LT(r.per_band[b - 1].center_hz, r.per_band[b].center_hz);
  }

  const EvalReport self = evaluate(truth, truth);
  EXPECT_EQ(self.amp_err, 0.0);
  EXPECT_EQ(self.ang_err, 0.0);
  EXPECT_EQ(self.energy_err, 0.0);

  const std::string csv = per_band_csv(r);
  EXPECT_EQ(std::count(csv.begin(), csv.end(), '\n'), 6);
  EXPECT_EQ(csv.rfind("center_hz,n_bins,mag_err,phase_err\n", 0), 0u);
  const Json j = Json::parse(report_json(r));
  EXPECT_EQ(j["per_band"].size(), 5u);
  EXPECT_NEAR(j["amp_err"].get<double>(), r.amp_err, 1e-15 * r.amp_err);
  const std::string summary = report_csv(r);
  EXPECT_EQ(std::count(summary.begin(), summary.end(), '\n'), 2);
  EXPECT_THROW(evaluate(truth, {}), InvalidInput);
}

TEST(Evaluate, MissingReverbIsReportedAsNA) {
  const FrequencyGrid g(64, 1000.0);
  ComplexSpectrum flat(g, std::vector<Complex>(33, 1.0));  // an impulse: no measurable decay
  const EvalReport r = evaluate({flat}, {flat});
  EXPECT_FALSE(r.t60_err.has_value());
  EXPECT_NE(report_csv(r).find("NA"), std::string::npos);
  EXPECT_TRUE(Json::parse(report_json(r))["t60_err"].is_null());
}

}  // namespace
}  // namespace freqfield
