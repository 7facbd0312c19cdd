// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <span>
#include <string>
#include <vector>

#include "freqfield/field.hpp"
#include "freqfield/spectra.hpp"

namespace freqfield {

// Per-bin weights and term multipliers of the training objective.
struct LossWeights {
  std::vector<double> spec;
  std::vector<double> mag;
  std::vector<double> phase;
  std::vector<double> env;  // weight inside the envelope log
  double lambda_spec = 1.0;
  double lambda_mag = 1.0;
  double lambda_phase = 1.0;
  double lambda_env = 0.5;
  double lambda_kk = 0.01;
  double env_alpha = 0.1;
  double env_epsilon = 1e-6;

  static LossWeights uniform(std::size_t n_bins);
  // Throws InvalidInput on negative entries or length mismatch.
  void validate(std::size_t n_bins) const;
};

struct WeightProfile {
  enum class Kind { kUniform, kLowFreqPhase, kCrossoverNotch };
  Kind kind = Kind::kUniform;
  double center_hz = 0.0;
  double width_hz = 0.0;
  double depth = 0.0;
  double reference_hz = 500.0;  // lowfreq-phase knee

  // "uniform", "lowfreq-phase" or "crossover-notch:<center>:<width>:<depth>".
  static WeightProfile parse(const std::string& text);
  [[nodiscard]] std::string to_string() const;
};

// uniform: all ones. lowfreq-phase: phase weight 1 / (1 + f / f_ref).
// crossover-notch: spec/mag/phase weights times
// 1 - depth * exp(-(f - center)^2 / (2 width^2)). The envelope weight and
// the lambdas keep their defaults.
LossWeights make_perceptual_weights(const FrequencyGrid& grid, const WeightProfile& profile);

// Band mask and taper for the Kramers-Kronig regularizer. The mask never
// includes DC or Nyquist.
struct KKContext {
  std::vector<unsigned char> band_mask;
  double taper_fraction = 0.1;

  // Excludes the outer round(taper_fraction * (n_bins - 1)) bins at each end
  // (at least DC and Nyquist).
  static KKContext default_for(std::size_t n_bins, double taper_fraction = 0.1);
  void validate(std::size_t n_bins) const;
};

// Angle convention shared by losses and metrics: bins with |z| < 1e-12 are
// treated as angle 0.
inline constexpr double kPhaseGuard = 1e-12;

// Each spectral loss optionally accumulates scale * dL/d(pred) into
// grad_pred, using the convention dL/dRe + j dL/dIm.
double loss_spec(const ComplexSpectrum& truth, const ComplexSpectrum& pred,
                 std::span<const double> w, std::span<Complex> grad_pred = {}, double scale = 1.0);
double loss_mag(const ComplexSpectrum& truth, const ComplexSpectrum& pred,
                std::span<const double> w, std::span<Complex> grad_pred = {}, double scale = 1.0);
double loss_phase(const ComplexSpectrum& truth, const ComplexSpectrum& pred,
                  std::span<const double> w, std::span<Complex> grad_pred = {}, double scale = 1.0);
double loss_env(const ComplexSpectrum& truth, const ComplexSpectrum& pred,
                std::span<const double> w, double alpha, double epsilon,
                std::span<Complex> grad_pred = {}, double scale = 1.0);

// Dense matrix form of hilbert_kk for a fixed (n_bins, taper_fraction).
class HilbertOperator {
 public:
  HilbertOperator(std::size_t n_bins, double taper_fraction);
  [[nodiscard]] const Matrix& matrix() const { return m_; }
  [[nodiscard]] std::size_t n_bins() const { return static_cast<std::size_t>(m_.rows()); }
  [[nodiscard]] double taper_fraction() const { return taper_; }

 private:
  Matrix m_;
  double taper_;
};

struct KKGradients {
  Matrix sigma;  // n_bins x P
  Matrix beta;   // n_bins x P
  double kappa = 0.0;
};

// Mean over the P columns of sum_{f in B} (beta - kappa * H{sigma})^2.
double loss_kk(const Matrix& sigma, const Matrix& beta, double kappa, const KKContext& ctx,
               KKGradients* grad = nullptr);

struct LossBreakdown {
  double spec = 0.0;
  double mag = 0.0;
  double phase = 0.0;
  double env = 0.0;
  double kk = 0.0;
  double total = 0.0;
};

struct LossGradients {
  std::vector<Complex> pred;  // dL/dRe + j dL/dIm of the prediction
  KKGradients kk;
};

// Weighted sum of all five terms. `kk_sigma`/`kk_beta` hold the field samples
// for the KK term (skipped when null or empty).
LossBreakdown loss_total(const ComplexSpectrum& truth, const ComplexSpectrum& pred,
                         const Matrix* kk_sigma, const Matrix* kk_beta, double kappa,
                         const LossWeights& weights, const KKContext& ctx,
                         LossGradients* grad = nullptr);

}  // namespace freqfield
