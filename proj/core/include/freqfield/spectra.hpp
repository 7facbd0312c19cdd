// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <complex>
#include <cstddef>
#include <span>
#include <vector>

namespace freqfield {

using Complex = std::complex<double>;

// One-sided frequency grid of a real n_fft-sample signal.
class FrequencyGrid {
 public:
  FrequencyGrid() = default;
  // Throws InvalidInput unless n_fft is even and >= 8 and sample_rate > 0.
  FrequencyGrid(std::size_t n_fft, double sample_rate);

  [[nodiscard]] std::size_t n_fft() const { return n_fft_; }
  [[nodiscard]] double sample_rate() const { return sample_rate_; }
  [[nodiscard]] std::size_t n_bins() const { return n_fft_ / 2 + 1; }
  [[nodiscard]] double bin_hz(std::size_t i) const;
  [[nodiscard]] double bin_spacing_hz() const { return sample_rate_ / static_cast<double>(n_fft_); }
  [[nodiscard]] std::vector<double> frequencies() const;

  friend bool operator==(const FrequencyGrid&, const FrequencyGrid&) = default;

 private:
  std::size_t n_fft_ = 8;
  double sample_rate_ = 1.0;
};

struct ComplexSpectrum {
  FrequencyGrid grid;
  std::vector<Complex> values;

  ComplexSpectrum() = default;
  explicit ComplexSpectrum(const FrequencyGrid& g) : grid(g), values(g.n_bins()) {}
  ComplexSpectrum(const FrequencyGrid& g, std::vector<Complex> v);

  [[nodiscard]] std::size_t size() const { return values.size(); }
};

struct ImpulseResponse {
  FrequencyGrid grid;
  std::vector<double> samples;

  ImpulseResponse() = default;
  ImpulseResponse(const FrequencyGrid& g, std::vector<double> s);
};

// One-sided DFT, X[k] = sum_n x[n] exp(-2 pi j k n / N).
ComplexSpectrum forward_spectrum(const ImpulseResponse& ir);

// Inverse of forward_spectrum. The imaginary parts of the DC and Nyquist
// bins are dropped (a warning is logged when they exceed 1e-6 of the bin
// magnitude).
ImpulseResponse inverse_ir(const ComplexSpectrum& spec);

// Discrete Hilbert transform of a one-sided real profile sampled on the
// n_bins grid. The profile is even-extended to the two-sided length
// 2 (n_bins - 1), transformed with the -j sgn(k) multiplier, and the highest
// taper_fraction of lag bins on each side is rolled off with a raised
// cosine. Linear, maps constants to zero.
std::vector<double> hilbert_kk(std::span<const double> profile, double taper_fraction);

// Zero-lag exponential smoother: forward pass s(i) = a x(i) + (1-a) s(i-1),
// the mirrored backward pass, averaged. Linear in x.
std::vector<double> exp_smooth_zero_lag(std::span<const double> x, double alpha);
// Adjoint (transpose) of exp_smooth_zero_lag, used for reverse-mode gradients.
std::vector<double> exp_smooth_zero_lag_adjoint(std::span<const double> g, double alpha);

// e(i) = log(|spec[i]| * weights[i] + epsilon), then exp_smooth_zero_lag.
std::vector<double> smooth_log_envelope(const ComplexSpectrum& spec,
                                        std::span<const double> weights, double alpha,
                                        double epsilon);

}  // namespace freqfield
