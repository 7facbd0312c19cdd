// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "freqfield/metrics.hpp"

#include <algorithm>
#include <cmath>
#include <iomanip>
#include <limits>
#include <numbers>
#include <sstream>

#include "fft.hpp"
#include "freqfield/config_io.hpp"
#include "freqfield/error.hpp"
#include "freqfield/losses.hpp"

namespace freqfield {

namespace {

double guarded_arg(const Complex& z) { return std::abs(z) < kPhaseGuard ? 0.0 : std::arg(z); }

double angle_error(const Complex& a, const Complex& b) {
  const double ta = guarded_arg(a), tb = guarded_arg(b);
  return std::abs(std::cos(ta) - std::cos(tb)) + std::abs(std::sin(ta) - std::sin(tb));
}

void check_grids(const ComplexSpectrum& a, const ComplexSpectrum& b, const char* who) {
  if (a.grid != b.grid || a.size() != b.size() || a.size() != a.grid.n_bins())
    throw InvalidInput(std::string(who) + ": spectra are on different grids");
}

std::optional<double> fit_decay(const std::vector<double>& edc, double sample_rate, double hi_db,
                                double lo_db) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  std::size_t n = 0;
  bool reached = false;
  for (std::size_t i = 0; i < edc.size(); ++i) {
    const double d = edc[i];
    if (d < lo_db) {
      reached = true;
      break;
    }
    if (d <= hi_db) {
      const double t = static_cast<double>(i) / sample_rate;
      sx += t;
      sy += d;
      sxx += t * t;
      sxy += t * d;
      ++n;
    }
  }
  if (!reached || n < 2) return std::nullopt;
  const double nn = static_cast<double>(n);
  const double denom = nn * sxx - sx * sx;
  if (denom <= 0.0) return std::nullopt;
  const double slope = (nn * sxy - sx * sy) / denom;  // dB per second
  if (!(slope < 0.0)) return std::nullopt;
  return -60.0 / slope;
}

std::optional<double> rel_err(const std::optional<double>& truth,
                              const std::optional<double>& pred) {
  if (!truth || !pred || *truth <= 0.0) return std::nullopt;
  return std::abs(*pred - *truth) / *truth;
}

std::vector<double> hann(std::size_t n) {
  std::vector<double> w(n);
  for (std::size_t i = 0; i < n; ++i)
    w[i] = 0.5 -
           0.5 * std::cos(2.0 * std::numbers::pi * static_cast<double>(i) / static_cast<double>(n));
  return w;
}

// Mean over frames and bins of |log(|A|+eps) - log(|B|+eps)| for one window.
double stft_window_distance(const std::vector<double>& a, const std::vector<double>& b,
                            std::size_t win) {
  constexpr double kEps = 1e-8;
  const std::size_t hop = win / 4;
  const auto w = hann(win);
  const auto& fft = detail::real_fft(win);
  std::vector<double> fa(win), fb(win);
  std::vector<Complex> sa(win / 2 + 1), sb(win / 2 + 1);
  double total = 0.0;
  std::size_t count = 0;
  for (std::size_t start = 0; start < a.size(); start += hop) {
    for (std::size_t i = 0; i < win; ++i) {
      const std::size_t t = start + i;
      fa[i] = t < a.size() ? a[t] * w[i] : 0.0;
      fb[i] = t < b.size() ? b[t] * w[i] : 0.0;
    }
    fft.forward(fa, sa);
    fft.forward(fb, sb);
    for (std::size_t k = 0; k < sa.size(); ++k)
      total += std::abs(std::log(std::abs(sa[k]) + kEps) - std::log(std::abs(sb[k]) + kEps));
    count += sa.size();
  }
  return total / static_cast<double>(count);
}

std::string fmt(double v) {
  std::ostringstream os;
  os << std::setprecision(17) << v;
  return os.str();
}

std::string fmt(const std::optional<double>& v) { return v ? fmt(*v) : "NA"; }

Json opt_json(const std::optional<double>& v) { return v ? Json(*v) : Json(nullptr); }

}  // namespace

ImpulseResponse real_ir(const ComplexSpectrum& spec) {
  ComplexSpectrum s = spec;
  s.values.front() = Complex(s.values.front().real(), 0.0);
  s.values.back() = Complex(s.values.back().real(), 0.0);
  return inverse_ir(s);
}

double stft_distance(const ImpulseResponse& a, const ImpulseResponse& b) {
  if (a.samples.size() != b.samples.size())
    throw InvalidInput("stft_distance: impulse responses differ in length");
  double sum = 0.0;
  for (std::size_t win : {256u, 512u, 1024u})
    sum += stft_window_distance(a.samples, b.samples, win);
  return sum / 3.0;
}

PairMetrics eval_pair(const ComplexSpectrum& truth, const ComplexSpectrum& pred) {
  check_grids(truth, pred, "eval_pair");
  const std::size_t n = truth.size();
  PairMetrics m;
  double e_true = 0.0, e_pred = 0.0;
  for (std::size_t i = 0; i < n; ++i) {
    const Complex a = truth.values[i], b = pred.values[i];
    m.amp += std::abs(std::abs(a) - std::abs(b));
    m.ang += angle_error(a, b);
    m.spec += std::abs(a.real() - b.real()) + std::abs(a.imag() - b.imag());
    e_true += std::norm(a);
    e_pred += std::norm(b);
  }
  const double nn = static_cast<double>(n);
  m.amp /= nn;
  m.ang /= nn;
  m.spec /= nn;
  if (!(e_true > 0.0)) throw InvalidInput("eval_pair: reference spectrum has zero energy");
  m.energy = std::abs(e_true - e_pred) / e_true;

  const LossWeights defaults;
  const std::vector<double> ones(n, 1.0);
  const auto env_t = smooth_log_envelope(truth, ones, defaults.env_alpha, defaults.env_epsilon);
  const auto env_p = smooth_log_envelope(pred, ones, defaults.env_alpha, defaults.env_epsilon);
  for (std::size_t i = 0; i < n; ++i) m.env += std::abs(env_t[i] - env_p[i]);
  m.env /= nn;

  m.stft = stft_distance(real_ir(truth), real_ir(pred));
  return m;
}

std::vector<double> schroeder_curve_db(const ImpulseResponse& ir) {
  const auto& h = ir.samples;
  std::vector<double> edc(h.size());
  double acc = 0.0;
  for (std::size_t i = h.size(); i-- > 0;) {
    acc += h[i] * h[i];
    edc[i] = acc;
  }
  if (edc.empty() || !(edc[0] > 0.0)) throw InvalidInput("schroeder_curve_db: all-zero IR");
  const double ref = edc[0];
  for (double& e : edc)
    e = e > 0.0 ? 10.0 * std::log10(e / ref) : -std::numeric_limits<double>::infinity();
  return edc;
}

ReverbTimes reverberation_times(const ImpulseResponse& ir) {
  const auto edc = schroeder_curve_db(ir);
  const double sr = ir.grid.sample_rate();
  ReverbTimes r;
  r.t60 = fit_decay(edc, sr, -5.0, -25.0);
  if (auto edt10 = fit_decay(edc, sr, 0.0, -10.0)) r.edt = edt10;
  return r;
}

ReverbErrors reverberation_metrics(const ImpulseResponse& truth, const ImpulseResponse& pred) {
  if (truth.grid != pred.grid || truth.samples.size() != pred.samples.size())
    throw InvalidInput("reverberation_metrics: impulse responses on different grids");
  const auto t = reverberation_times(truth);
  const auto p = reverberation_times(pred);
  return {rel_err(t.t60, p.t60), rel_err(t.edt, p.edt)};
}

std::vector<BandError> per_band_errors(const ComplexSpectrum& truth, const ComplexSpectrum& pred,
                                       std::vector<double> centers,
                                       std::optional<double> band_width_hz) {
  check_grids(truth, pred, "per_band_errors");
  if (band_width_hz && !(*band_width_hz > 0.0))
    throw InvalidInput("per_band_errors: band width must be positive");
  std::sort(centers.begin(), centers.end());
  std::vector<BandError> out;
  const double third = std::pow(2.0, 1.0 / 6.0);
  for (double c : centers) {
    const double lo = band_width_hz ? c - *band_width_hz / 2.0 : c / third;
    const double hi = band_width_hz ? c + *band_width_hz / 2.0 : c * third;
    BandError b;
    b.center_hz = c;
    double mag = 0.0, ph = 0.0;
    for (std::size_t i = 0; i < truth.size(); ++i) {
      const double f = truth.grid.bin_hz(i);
      if (f < lo || f > hi) continue;
      const Complex a = truth.values[i], z = pred.values[i];
      mag += std::abs(std::abs(a) - std::abs(z));
      ph += angle_error(a, z);
      ++b.n_bins;
    }
    if (b.n_bins > 0) {
      b.mag_err = mag / static_cast<double>(b.n_bins);
      b.phase_err = ph / static_cast<double>(b.n_bins);
    }
    out.push_back(b);
  }
  return out;
}

EvalReport evaluate(const std::vector<ComplexSpectrum>& truth,
                    const std::vector<ComplexSpectrum>& pred,
                    const std::vector<double>& band_centers, std::optional<double> band_width_hz) {
  if (truth.size() != pred.size()) throw InvalidInput("evaluate: truth/prediction count mismatch");
  if (truth.empty()) throw InvalidInput("evaluate: no receivers");
  EvalReport r;
  r.n_receivers = truth.size();
  double t60 = 0.0, edt = 0.0;
  std::size_t n_t60 = 0, n_edt = 0;
  std::vector<double> band_mag, band_ph;
  std::vector<std::size_t> band_count;
  for (std::size_t k = 0; k < truth.size(); ++k) {
    const PairMetrics m = eval_pair(truth[k], pred[k]);
    r.amp_err += m.amp;
    r.ang_err += m.ang;
    r.spec_err += m.spec;
    r.stft_err += m.stft;
    r.energy_err += m.energy;
    r.env_err += m.env;
    const ImpulseResponse ir_pred = real_ir(pred[k]);
    const bool pred_silent = std::all_of(ir_pred.samples.begin(), ir_pred.samples.end(),
                                         [](double x) { return x == 0.0; });
    if (!pred_silent) {
      const ReverbErrors rv = reverberation_metrics(real_ir(truth[k]), ir_pred);
      if (rv.t60) t60 += *rv.t60, ++n_t60;
      if (rv.edt) edt += *rv.edt, ++n_edt;
    }
    const auto bands = per_band_errors(truth[k], pred[k], band_centers, band_width_hz);
    if (k == 0) {
      r.per_band = bands;
      band_mag.assign(bands.size(), 0.0);
      band_ph.assign(bands.size(), 0.0);
      band_count.assign(bands.size(), 0);
    }
    for (std::size_t b = 0; b < bands.size(); ++b)
      if (bands[b].mag_err) {
        band_mag[b] += *bands[b].mag_err;
        band_ph[b] += *bands[b].phase_err;
        ++band_count[b];
      }
  }
  const double n = static_cast<double>(truth.size());
  r.amp_err /= n;
  r.ang_err /= n;
  r.spec_err /= n;
  r.stft_err /= n;
  r.energy_err /= n;
  r.env_err /= n;
  if (n_t60) r.t60_err = t60 / static_cast<double>(n_t60);
  if (n_edt) r.edt_err = edt / static_cast<double>(n_edt);
  for (std::size_t b = 0; b < r.per_band.size(); ++b) {
    if (band_count[b]) {
      r.per_band[b].mag_err = band_mag[b] / static_cast<double>(band_count[b]);
      r.per_band[b].phase_err = band_ph[b] / static_cast<double>(band_count[b]);
    }
  }
  return r;
}

std::string report_json(const EvalReport& r) {
  Json j;
  j["n_receivers"] = r.n_receivers;
  j["amp_err"] = r.amp_err;
  j["ang_err"] = r.ang_err;
  j["spec_err"] = r.spec_err;
  j["stft_err"] = r.stft_err;
  j["energy_err"] = r.energy_err;
  j["env_err"] = r.env_err;
  j["t60_err"] = opt_json(r.t60_err);
  j["edt_err"] = opt_json(r.edt_err);
  Json bands = Json::array();
  for (const auto& b : r.per_band)
    bands.push_back({{"center_hz", b.center_hz},
                     {"n_bins", b.n_bins},
                     {"mag_err", opt_json(b.mag_err)},
                     {"phase_err", opt_json(b.phase_err)}});
  j["per_band"] = bands;
  return dump_canonical(j);
}

std::string report_csv(const EvalReport& r) {
  std::ostringstream os;
  os << "n_receivers,amp_err,ang_err,spec_err,stft_err,energy_err,env_err,t60_err,edt_err\n"
     << r.n_receivers << ',' << fmt(r.amp_err) << ',' << fmt(r.ang_err) << ',' << fmt(r.spec_err)
     << ',' << fmt(r.stft_err) << ',' << fmt(r.energy_err) << ',' << fmt(r.env_err) << ','
     << fmt(r.t60_err) << ',' << fmt(r.edt_err) << '\n';
  return os.str();
}

std::string per_band_csv(const EvalReport& r) {
  std::ostringstream os;
  os << "center_hz,n_bins,mag_err,phase_err\n";
  for (const auto& b : r.per_band)
    os << fmt(b.center_hz) << ',' << b.n_bins << ',' << fmt(b.mag_err) << ',' << fmt(b.phase_err)
       << '\n';
  return os.str();
}

}  // namespace freqfield
