// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <string>
#include <vector>

#include "freqfield/spectra.hpp"

namespace freqfield {

// Unweighted counterparts of the training losses for one receiver.
struct PairMetrics {
  double amp = 0.0;     // mean | |H| - |H'| |
  double ang = 0.0;     // mean |cos d| + |sin d| differences of the angles
  double spec = 0.0;    // mean |dRe| + |dIm|
  double energy = 0.0;  // |E - E'| / E
  double env = 0.0;     // mean |smoothed log envelope difference|
  double stft = 0.0;    // multi-window log-magnitude L1
};

// Throws InvalidInput on grid mismatch or a zero-energy reference.
PairMetrics eval_pair(const ComplexSpectrum& truth, const ComplexSpectrum& pred);

// Multi-window (256/512/1024, hop 1/4, Hann) mean L1 distance of
// log(|STFT| + 1e-8) between the two impulse responses.
double stft_distance(const ImpulseResponse& a, const ImpulseResponse& b);

// Reverberation times of one IR from its Schroeder decay curve. T60 fits
// -5..-25 dB and extrapolates to 60 dB; EDT fits 0..-10 dB, times 6. Either is
// empty when the curve does not reach the fit range.
struct ReverbTimes {
  std::optional<double> t60;
  std::optional<double> edt;
};
ReverbTimes reverberation_times(const ImpulseResponse& ir);
// Schroeder energy decay curve in dB, normalized to 0 dB at t = 0.
std::vector<double> schroeder_curve_db(const ImpulseResponse& ir);

struct ReverbErrors {
  std::optional<double> t60;  // |pred - true| / true
  std::optional<double> edt;
};
// Throws InvalidInput on an all-zero IR or mismatched grids.
ReverbErrors reverberation_metrics(const ImpulseResponse& truth, const ImpulseResponse& pred);

struct BandError {
  double center_hz = 0.0;
  std::size_t n_bins = 0;
  std::optional<double> mag_err;  // empty when no bin falls in the band
  std::optional<double> phase_err;
};

inline const std::vector<double> kDefaultBandCenters{180.0, 360.0, 720.0, 1440.0, 2880.0};

// Bins with |f - center| <= width / 2; one-third octave
// [c 2^-1/6, c 2^1/6] when width is not given. Output sorted by center.
std::vector<BandError> per_band_errors(const ComplexSpectrum& truth, const ComplexSpectrum& pred,
                                       std::vector<double> centers,
                                       std::optional<double> band_width_hz = std::nullopt);

// Held-out averages. Reverberation errors average over receivers where they
// are available and stay empty when none are.
struct EvalReport {
  std::size_t n_receivers = 0;
  double amp_err = 0.0;
  double ang_err = 0.0;
  double spec_err = 0.0;
  double stft_err = 0.0;
  double energy_err = 0.0;
  double env_err = 0.0;
  std::optional<double> t60_err;
  std::optional<double> edt_err;
  std::vector<BandError> per_band;
};

EvalReport evaluate(const std::vector<ComplexSpectrum>& truth,
                    const std::vector<ComplexSpectrum>& pred,
                    const std::vector<double>& band_centers = kDefaultBandCenters,
                    std::optional<double> band_width_hz = std::nullopt);

// Impulse response of a spectrum whose DC/Nyquist imaginary parts are
// dropped silently.
ImpulseResponse real_ir(const ComplexSpectrum& spec);

std::string report_json(const EvalReport& report);
// One header row and one value row; unavailable values print as "NA".
std::string report_csv(const EvalReport& report);
// center_hz,n_bins,mag_err,phase_err rows in ascending center order.
std::string per_band_csv(const EvalReport& report);

}  // namespace freqfield
