// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "freqfield/spectra.hpp"

#include <cmath>
#include <iostream>
#include <numbers>
#include <string>

#include "fft.hpp"
#include "freqfield/error.hpp"

namespace freqfield {

FrequencyGrid::FrequencyGrid(std::size_t n_fft, double sample_rate)
    : n_fft_(n_fft), sample_rate_(sample_rate) {
  if (n_fft < 8 || n_fft % 2 != 0) {
    throw InvalidInput("FrequencyGrid: n_fft must be even and >= 8, got " + std::to_string(n_fft));
  }
  if (!(sample_rate > 0.0) || !std::isfinite(sample_rate)) {
    throw InvalidInput("FrequencyGrid: sample_rate must be positive");
  }
}

double FrequencyGrid::bin_hz(std::size_t i) const {
  // Nyquist is returned exactly rather than via the i * fs / n product.
  if (i == n_bins() - 1) return sample_rate_ / 2.0;
  return static_cast<double>(i) * sample_rate_ / static_cast<double>(n_fft_);
}

std::vector<double> FrequencyGrid::frequencies() const {
  std::vector<double> f(n_bins());
  for (std::size_t i = 0; i < f.size(); ++i) f[i] = bin_hz(i);
  return f;
}

ComplexSpectrum::ComplexSpectrum(const FrequencyGrid& g, std::vector<Complex> v)
    : grid(g), values(std::move(v)) {
  if (values.size() != grid.n_bins()) {
    throw InvalidInput("ComplexSpectrum: expected " + std::to_string(grid.n_bins()) +
                       " bins, got " + std::to_string(values.size()));
  }
}

ImpulseResponse::ImpulseResponse(const FrequencyGrid& g, std::vector<double> s)
    : grid(g), samples(std::move(s)) {
  if (samples.size() != grid.n_fft()) {
    throw InvalidInput("ImpulseResponse: expected " + std::to_string(grid.n_fft()) +
                       " samples, got " + std::to_string(samples.size()));
  }
}

ComplexSpectrum forward_spectrum(const ImpulseResponse& ir) {
  if (ir.samples.size() != ir.grid.n_fft()) {
    throw InvalidInput("forward_spectrum: sample count does not match grid");
  }
  ComplexSpectrum out(ir.grid);
  detail::real_fft(ir.grid.n_fft()).forward(ir.samples, out.values);
  return out;
}

ImpulseResponse inverse_ir(const ComplexSpectrum& spec) {
  const auto& grid = spec.grid;
  if (spec.values.size() != grid.n_bins()) {
    throw InvalidInput("inverse_ir: bin count does not match grid");
  }
  std::vector<Complex> half = spec.values;
  for (const std::size_t edge : {std::size_t{0}, grid.n_bins() - 1}) {
    const double im = std::abs(half[edge].imag());
    if (im > 1e-6 * std::abs(half[edge]) && im > 0.0) {
      std::cerr << "[freqfield] warning: inverse_ir discarding imaginary part " << im << " at bin "
                << edge << "\n";
    }
    half[edge] = Complex(half[edge].real(), 0.0);
  }
  ImpulseResponse ir(grid, std::vector<double>(grid.n_fft()));
  detail::real_fft(grid.n_fft()).inverse(half, ir.samples);
  const double scale = 1.0 / static_cast<double>(grid.n_fft());
  for (double& x : ir.samples) x *= scale;
  return ir;
}

std::vector<double> hilbert_kk(std::span<const double> profile, double taper_fraction) {
  if (!(taper_fraction >= 0.0 && taper_fraction <= 0.5)) {
    throw InvalidInput("hilbert_kk: taper_fraction must lie in [0, 0.5]");
  }
  const std::size_t n_bins = profile.size();
  if (n_bins < 5) throw InvalidInput("hilbert_kk: profile needs at least 5 bins");
  const std::size_t n = 2 * (n_bins - 1);
  const std::size_t half = n / 2;

  std::vector<double> ext(n);
  for (std::size_t i = 0; i < n_bins; ++i) ext[i] = profile[i];
  for (std::size_t i = 1; i + 1 < n_bins; ++i) ext[n - i] = profile[i];

  const auto& fft = detail::real_fft(n);
  std::vector<Complex> lag(half + 1);
  fft.forward(ext, lag);

  const auto roll =
      static_cast<std::size_t>(std::lround(taper_fraction * static_cast<double>(half)));
  const std::size_t roll_start = half - roll;
  lag[0] = 0.0;
  lag[half] = 0.0;
  for (std::size_t k = 1; k < half; ++k) {
    double w = 1.0;
    if (roll > 0 && k > roll_start) {
      w = 0.5 * (1.0 + std::cos(std::numbers::pi * static_cast<double>(k - roll_start) /
                                static_cast<double>(roll)));
    }
    lag[k] *= Complex(0.0, -w);
  }

  std::vector<double> out_ext(n);
  fft.inverse(lag, out_ext);
  std::vector<double> out(n_bins);
  const double scale = 1.0 / static_cast<double>(n);
  for (std::size_t i = 0; i < n_bins; ++i) out[i] = out_ext[i] * scale;
  return out;
}

namespace {
void check_alpha(double alpha) {
  if (!(alpha > 0.0 && alpha <= 1.0)) {
    throw InvalidInput("exponential smoothing: alpha must lie in (0, 1]");
  }
}
}  // namespace

std::vector<double> exp_smooth_zero_lag(std::span<const double> x, double alpha) {
  check_alpha(alpha);
  const std::size_t n = x.size();
  std::vector<double> fwd(n), bwd(n), out(n);
  if (n == 0) return out;
  fwd[0] = x[0];
  for (std::size_t i = 1; i < n; ++i) fwd[i] = alpha * x[i] + (1.0 - alpha) * fwd[i - 1];
  bwd[n - 1] = x[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) bwd[i] = alpha * x[i] + (1.0 - alpha) * bwd[i + 1];
  for (std::size_t i = 0; i < n; ++i) out[i] = 0.5 * (fwd[i] + bwd[i]);
  return out;
}

std::vector<double> exp_smooth_zero_lag_adjoint(std::span<const double> g, double alpha) {
  check_alpha(alpha);
  const std::size_t n = g.size();
  std::vector<double> out(n, 0.0);
  if (n == 0) return out;
  // Forward recursion transposed: a causal filter becomes anti-causal. The
  // first sample enters with weight 1 instead of alpha.
  std::vector<double> acc(n);
  acc[n - 1] = 0.5 * g[n - 1];
  for (std::size_t i = n - 1; i-- > 0;) acc[i] = 0.5 * g[i] + (1.0 - alpha) * acc[i + 1];
  for (std::size_t i = 0; i < n; ++i) out[i] += (i == 0 ? 1.0 : alpha) * acc[i];
  acc[0] = 0.5 * g[0];
  for (std::size_t i = 1; i < n; ++i) acc[i] = 0.5 * g[i] + (1.0 - alpha) * acc[i - 1];
  for (std::size_t i = 0; i < n; ++i) out[i] += (i == n - 1 ? 1.0 : alpha) * acc[i];
  return out;
}

std::vector<double> smooth_log_envelope(const ComplexSpectrum& spec,
                                        std::span<const double> weights, double alpha,
                                        double epsilon) {
  const std::size_t n = spec.values.size();
  if (n != spec.grid.n_bins() || weights.size() != n) {
    throw InvalidInput("smooth_log_envelope: weights/spectrum length mismatch");
  }
  if (!(epsilon > 0.0)) throw InvalidInput("smooth_log_envelope: epsilon must be positive");
  std::vector<double> e(n);
  for (std::size_t i = 0; i < n; ++i) {
    if (weights[i] < 0.0) throw InvalidInput("smooth_log_envelope: negative weight");
    e[i] = std::log(std::abs(spec.values[i]) * weights[i] + epsilon);
  }
  return exp_smooth_zero_lag(e, alpha);
}

}  // namespace freqfield
