// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "freqfield/losses.hpp"

#include <algorithm>
#include <cmath>
#include <map>
#include <memory>
#include <mutex>
#include <sstream>

#include "freqfield/error.hpp"

namespace freqfield {

namespace {

void check_pair(const ComplexSpectrum& a, const ComplexSpectrum& b, std::span<const double> w,
                const char* what) {
  if (!(a.grid == b.grid) || a.values.size() != b.values.size() ||
      a.values.size() != a.grid.n_bins()) {
    throw InvalidInput(std::string(what) + ": spectra are not on the same grid");
  }
  if (w.size() != a.values.size()) {
    throw InvalidInput(std::string(what) + ": weight vector length mismatch");
  }
}

void check_grad(std::span<Complex> grad, std::size_t n, const char* what) {
  if (!grad.empty() && grad.size() != n) {
    throw InvalidInput(std::string(what) + ": gradient buffer length mismatch");
  }
}

double sign(double x) { return static_cast<double>((x > 0.0) - (x < 0.0)); }

// (cos, sin) of arg z with the zero-magnitude guard.
std::pair<double, double> unit_phasor(Complex z) {
  const double r = std::abs(z);
  if (r < kPhaseGuard) return {1.0, 0.0};
  return {z.real() / r, z.imag() / r};
}

void check_weights(const std::vector<double>& w, std::size_t n, const char* name) {
  if (w.size() != n) throw InvalidInput(std::string("LossWeights: ") + name + " length mismatch");
  for (double x : w) {
    if (!(x >= 0.0)) throw InvalidInput(std::string("LossWeights: negative ") + name + " weight");
  }
}

}  // namespace

LossWeights LossWeights::uniform(std::size_t n_bins) {
  LossWeights w;
  w.spec.assign(n_bins, 1.0);
  w.mag.assign(n_bins, 1.0);
  w.phase.assign(n_bins, 1.0);
  w.env.assign(n_bins, 1.0);
  return w;
}

void LossWeights::validate(std::size_t n_bins) const {
  check_weights(spec, n_bins, "spec");
  check_weights(mag, n_bins, "mag");
  check_weights(phase, n_bins, "phase");
  check_weights(env, n_bins, "env");
  for (double l : {lambda_spec, lambda_mag, lambda_phase, lambda_env, lambda_kk}) {
    if (!(l >= 0.0)) throw InvalidInput("LossWeights: lambdas must be non-negative");
  }
  if (!(env_alpha > 0.0 && env_alpha <= 1.0)) throw InvalidInput("LossWeights: env_alpha in (0,1]");
  if (!(env_epsilon > 0.0)) throw InvalidInput("LossWeights: env_epsilon must be positive");
}

WeightProfile WeightProfile::parse(const std::string& text) {
  WeightProfile p;
  if (text == "uniform") return p;
  if (text == "lowfreq-phase") {
    p.kind = Kind::kLowFreqPhase;
    return p;
  }
  const std::string prefix = "crossover-notch:";
  if (text.rfind(prefix, 0) == 0) {
    std::istringstream in(text.substr(prefix.size()));
    char c1 = 0, c2 = 0;
    p.kind = Kind::kCrossoverNotch;
    if (!(in >> p.center_hz >> c1 >> p.width_hz >> c2 >> p.depth) || c1 != ':' || c2 != ':' ||
        !in.eof()) {
      throw InvalidInput(
          "weight profile: expected crossover-notch:<center>:<width>:<depth>, got '" + text + "'");
    }
    if (!(p.width_hz > 0.0) || !(p.depth >= 0.0 && p.depth <= 1.0) || !(p.center_hz >= 0.0)) {
      throw InvalidInput("weight profile: need width > 0, depth in [0,1], center >= 0");
    }
    return p;
  }
  throw InvalidInput("weight profile: unknown profile '" + text + "'");
}

std::string WeightProfile::to_string() const {
  switch (kind) {
    case Kind::kUniform:
      return "uniform";
    case Kind::kLowFreqPhase:
      return "lowfreq-phase";
    case Kind::kCrossoverNotch: {
      std::ostringstream out;
      out.precision(17);
      out << "crossover-notch:" << center_hz << ":" << width_hz << ":" << depth;
      return out.str();
    }
  }
  return "uniform";
}

LossWeights make_perceptual_weights(const FrequencyGrid& grid, const WeightProfile& profile) {
  LossWeights w = LossWeights::uniform(grid.n_bins());
  for (std::size_t i = 0; i < grid.n_bins(); ++i) {
    const double f = grid.bin_hz(i);
    switch (profile.kind) {
      case WeightProfile::Kind::kUniform:
        break;
      case WeightProfile::Kind::kLowFreqPhase:
        w.phase[i] = 1.0 / (1.0 + f / profile.reference_hz);
        break;
      case WeightProfile::Kind::kCrossoverNotch: {
        const double d = f - profile.center_hz;
        const double g =
            1.0 - profile.depth * std::exp(-d * d / (2.0 * profile.width_hz * profile.width_hz));
        w.spec[i] *= g;
        w.mag[i] *= g;
        w.phase[i] *= g;
        break;
      }
    }
  }
  return w;
}

KKContext KKContext::default_for(std::size_t n_bins, double taper_fraction) {
  if (n_bins < 5) throw InvalidInput("KKContext: need at least 5 bins");
  KKContext ctx;
  ctx.taper_fraction = taper_fraction;
  const auto edge = std::max<std::size_t>(
      1, static_cast<std::size_t>(std::lround(taper_fraction * static_cast<double>(n_bins - 1))));
  ctx.band_mask.assign(n_bins, 0);
  for (std::size_t i = edge; i + edge < n_bins; ++i) ctx.band_mask[i] = 1;
  return ctx;
}

void KKContext::validate(std::size_t n_bins) const {
  if (band_mask.size() != n_bins) throw ConfigError("KK band mask length mismatch");
  if (band_mask.front() != 0 || band_mask.back() != 0) {
    throw ConfigError("KK band mask must exclude DC and Nyquist");
  }
  if (std::none_of(band_mask.begin(), band_mask.end(), [](unsigned char b) { return b != 0; })) {
    throw ConfigError("KK band mask is empty");
  }
  if (!(taper_fraction >= 0.0 && taper_fraction <= 0.5)) {
    throw ConfigError("KK taper_fraction must lie in [0, 0.5]");
  }
}

double loss_spec(const ComplexSpectrum& truth, const ComplexSpectrum& pred,
                 std::span<const double> w, std::span<Complex> grad_pred, double scale) {
  check_pair(truth, pred, w, "loss_spec");
  check_grad(grad_pred, w.size(), "loss_spec");
  double loss = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const Complex d = pred.values[i] - truth.values[i];
    loss += w[i] * (std::abs(d.real()) + std::abs(d.imag()));
    if (!grad_pred.empty()) grad_pred[i] += scale * w[i] * Complex(sign(d.real()), sign(d.imag()));
  }
  return loss;
}

double loss_mag(const ComplexSpectrum& truth, const ComplexSpectrum& pred,
                std::span<const double> w, std::span<Complex> grad_pred, double scale) {
  check_pair(truth, pred, w, "loss_mag");
  check_grad(grad_pred, w.size(), "loss_mag");
  double loss = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const double rp = std::abs(pred.values[i]);
    const double d = rp - std::abs(truth.values[i]);
    loss += w[i] * std::abs(d);
    if (!grad_pred.empty() && rp > 0.0)
      grad_pred[i] += scale * w[i] * sign(d) * pred.values[i] / rp;
  }
  return loss;
}

double loss_phase(const ComplexSpectrum& truth, const ComplexSpectrum& pred,
                  std::span<const double> w, std::span<Complex> grad_pred, double scale) {
  check_pair(truth, pred, w, "loss_phase");
  check_grad(grad_pred, w.size(), "loss_phase");
  double loss = 0.0;
  for (std::size_t i = 0; i < w.size(); ++i) {
    const auto [ct, st] = unit_phasor(truth.values[i]);
    const auto [cp, sp] = unit_phasor(pred.values[i]);
    loss += w[i] * (std::abs(cp - ct) + std::abs(sp - st));
    const double r = std::abs(pred.values[i]);
    if (grad_pred.empty() || r < kPhaseGuard) continue;
    // d(cos)/dz = (sin^2, -sin cos) / r ; d(sin)/dz = (-sin cos, cos^2) / r
    const double gc = sign(cp - ct), gs = sign(sp - st);
    const double gx = (gc * sp * sp - gs * sp * cp) / r;
    const double gy = (-gc * sp * cp + gs * cp * cp) / r;
    grad_pred[i] += scale * w[i] * Complex(gx, gy);
  }
  return loss;
}

double loss_env(const ComplexSpectrum& truth, const ComplexSpectrum& pred,
                std::span<const double> w, double alpha, double epsilon,
                std::span<Complex> grad_pred, double scale) {
  check_pair(truth, pred, w, "loss_env");
  check_grad(grad_pred, w.size(), "loss_env");
  const auto st = smooth_log_envelope(truth, w, alpha, epsilon);
  const auto sp = smooth_log_envelope(pred, w, alpha, epsilon);
  double loss = 0.0;
  std::vector<double> g(w.size());
  for (std::size_t i = 0; i < w.size(); ++i) {
    loss += std::abs(st[i] - sp[i]);
    g[i] = sign(sp[i] - st[i]);
  }
  if (!grad_pred.empty()) {
    const auto ge = exp_smooth_zero_lag_adjoint(g, alpha);
    for (std::size_t i = 0; i < w.size(); ++i) {
      const double r = std::abs(pred.values[i]);
      if (r <= 0.0) continue;
      const double dlog = w[i] / (r * w[i] + epsilon);  // d e / d|z|
      grad_pred[i] += scale * ge[i] * dlog * pred.values[i] / r;
    }
  }
  return loss;
}

HilbertOperator::HilbertOperator(std::size_t n_bins, double taper_fraction)
    : m_(static_cast<Eigen::Index>(n_bins), static_cast<Eigen::Index>(n_bins)),
      taper_(taper_fraction) {
  std::vector<double> e(n_bins, 0.0);
  for (std::size_t j = 0; j < n_bins; ++j) {
    e[j] = 1.0;
    const auto col = hilbert_kk(e, taper_fraction);
    for (std::size_t i = 0; i < n_bins; ++i) {
      m_(static_cast<Eigen::Index>(i), static_cast<Eigen::Index>(j)) = col[i];
    }
    e[j] = 0.0;
  }
}

namespace {
const HilbertOperator& cached_operator(std::size_t n_bins, double taper) {
  static std::mutex mu;
  static std::map<std::pair<std::size_t, double>, std::unique_ptr<HilbertOperator>> cache;
  std::lock_guard lock(mu);
  auto& slot = cache[{n_bins, taper}];
  if (!slot) slot = std::make_unique<HilbertOperator>(n_bins, taper);
  return *slot;
}
}  // namespace

double loss_kk(const Matrix& sigma, const Matrix& beta, double kappa, const KKContext& ctx,
               KKGradients* grad) {
  const auto n_bins = static_cast<std::size_t>(sigma.rows());
  ctx.validate(n_bins);
  if (beta.rows() != sigma.rows() || beta.cols() != sigma.cols()) {
    throw InvalidInput("loss_kk: sigma/beta shape mismatch");
  }
  const Eigen::Index points = sigma.cols();
  if (points == 0) {
    if (grad)
      *grad = KKGradients{Matrix::Zero(sigma.rows(), 0), Matrix::Zero(sigma.rows(), 0), 0.0};
    return 0.0;
  }
  const Matrix& h = cached_operator(n_bins, ctx.taper_fraction).matrix();
  const Matrix beta_hat = h * sigma;
  Eigen::ArrayXd mask(sigma.rows());
  for (Eigen::Index i = 0; i < mask.size(); ++i)
    mask(i) = ctx.band_mask[static_cast<std::size_t>(i)] ? 1.0 : 0.0;
  const Matrix resid = ((beta - kappa * beta_hat).array().colwise() * mask).matrix();
  const double inv_p = 1.0 / static_cast<double>(points);
  const double loss = resid.squaredNorm() * inv_p;
  if (grad) {
    const Matrix d = 2.0 * inv_p * resid;
    grad->beta = d;
    grad->sigma = -kappa * (h.transpose() * d);
    grad->kappa = -(d.cwiseProduct(beta_hat)).sum();
  }
  return loss;
}

LossBreakdown loss_total(const ComplexSpectrum& truth, const ComplexSpectrum& pred,
                         const Matrix* kk_sigma, const Matrix* kk_beta, double kappa,
                         const LossWeights& weights, const KKContext& ctx, LossGradients* grad) {
  const std::size_t n = truth.values.size();
  weights.validate(n);
  std::span<Complex> g;
  if (grad) {
    grad->pred.assign(n, Complex(0.0, 0.0));
    g = grad->pred;
  }
  LossBreakdown out;
  out.spec = loss_spec(truth, pred, weights.spec, g, weights.lambda_spec);
  out.mag = loss_mag(truth, pred, weights.mag, g, weights.lambda_mag);
  out.phase = loss_phase(truth, pred, weights.phase, g, weights.lambda_phase);
  out.env = loss_env(truth, pred, weights.env, weights.env_alpha, weights.env_epsilon, g,
                     weights.lambda_env);
  if (kk_sigma && kk_beta && kk_sigma->cols() > 0) {
    KKGradients kg;
    out.kk = loss_kk(*kk_sigma, *kk_beta, kappa, ctx, grad ? &kg : nullptr);
    if (grad) {
      kg.sigma *= weights.lambda_kk;
      kg.beta *= weights.lambda_kk;
      kg.kappa *= weights.lambda_kk;
      grad->kk = std::move(kg);
    }
  }
  out.total = weights.lambda_spec * out.spec + weights.lambda_mag * out.mag +
              weights.lambda_phase * out.phase + weights.lambda_env * out.env +
              weights.lambda_kk * out.kk;
  return out;
}

}  // namespace freqfield
