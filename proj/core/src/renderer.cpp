// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "freqfield/renderer.hpp"

#include <cmath>
#include <numbers>

#include "freqfield/error.hpp"

namespace freqfield {

namespace {
constexpr double kPi = std::numbers::pi;
}

void RenderConfig::validate() const {
  if (n_samples < 1 || n_azimuth < 1 || n_elevation < 1) {
    throw ConfigError("render: sample and direction counts must be positive");
  }
  if (!(t_near >= 0.0) || !(t_far > t_near)) throw ConfigError("render: need t_far > t_near >= 0");
  if (!(speed_of_sound > 0.0)) throw ConfigError("render: speed_of_sound must be positive");
  if (cardioid_axis && !is_unit(*cardioid_axis)) {
    throw ConfigError("render: cardioid axis must be unit-norm");
  }
}

// Midpoint depths in training as well.
RenderConfig RenderConfig::desk() {
  RenderConfig c;
  c.jitter = false;
  return c;
}

RenderConfig RenderConfig::full() {
  RenderConfig c;
  c.n_samples = 64;
  c.n_azimuth = 64;
  c.n_elevation = 32;
  return c;
}

std::vector<DirectionSample> make_direction_grid(const RenderConfig& config) {
  std::vector<DirectionSample> out;
  out.reserve(static_cast<std::size_t>(config.n_directions()));
  const double d_az = 2.0 * kPi / config.n_azimuth;
  const double d_el = kPi / config.n_elevation;
  for (int e = 0; e < config.n_elevation; ++e) {
    const double lo = -0.5 * kPi + e * d_el;
    const double hi = lo + d_el;
    const double el = 0.5 * (lo + hi);
    // Exact cell solid angle: d_az * (sin hi - sin lo) ~ cos(el) d_el d_az.
    const double w = d_az * (std::sin(hi) - std::sin(lo));
    for (int a = 0; a < config.n_azimuth; ++a) {
      const double az = (a + 0.5) * d_az;
      out.push_back(
          {Vec3(std::cos(el) * std::cos(az), std::cos(el) * std::sin(az), std::sin(el)), w});
    }
  }
  return out;
}

namespace {

void append_ray(RaySet& rays, const SceneQuery& query, const Vec3& dir, double weight,
                const RenderConfig& config, Rng* jitter) {
  const int n = config.n_samples;
  const double du = (config.t_far - config.t_near) / n;
  const bool jittered = jitter != nullptr && config.jitter;
  std::vector<double> u(static_cast<std::size_t>(n));
  for (int k = 0; k < n; ++k) {
    // Jitter stays clear of the stratum edges so u_k > 0 even at t_near = 0.
    const double xi = jittered ? uniform(*jitter, 0.05, 0.95) : 0.5;
    u[static_cast<std::size_t>(k)] = config.t_near + (k + xi) * du;
  }
  rays.ray_directions.push_back(dir);
  rays.ray_weights.push_back(weight);
  for (int k = 0; k < n; ++k) {
    const auto kk = static_cast<std::size_t>(k);
    rays.positions.push_back(query.p_rx + u[kk] * dir);
    rays.directions.push_back(dir);
    rays.depth.push_back(u[kk]);
    rays.step.push_back(k + 1 < n ? u[kk + 1] - u[kk] : du);
  }
}

// Per-sample quantities shared by forward and backward passes, for one ray
// and one bin range.
struct RayBins {
  Eigen::ArrayXXcd contrib;  // c_k(f), n_bins x K
  Eigen::ArrayXXcd carrier;  // P_k(f) exp(j phi_k(f)) T_k(f), n_bins x K
  Eigen::ArrayXXd alpha;     // n_bins x K
};

RayBins evaluate_ray(const Eigen::ArrayXd& freqs, double v, const RaySet& rays, std::size_t first,
                     const FieldOutputs& field) {
  const auto nb = freqs.size();
  const int K = rays.samples_per_ray;
  RayBins rb{Eigen::ArrayXXcd(nb, K), Eigen::ArrayXXcd(nb, K), Eigen::ArrayXXd(nb, K)};
  Eigen::ArrayXd optical = Eigen::ArrayXd::Zero(nb);  // sum_{j<k} sigma_j du_j
  Eigen::ArrayXd phase = Eigen::ArrayXd::Zero(nb);    // phi_k
  for (int k = 0; k < K; ++k) {
    const std::size_t idx = first + static_cast<std::size_t>(k);
    const auto col = static_cast<Eigen::Index>(idx);
    const double u = rays.depth[idx];
    const double du = rays.step[idx];
    const Eigen::ArrayXd sigma = field.sigma.col(col).array();
    const Eigen::ArrayXd total_phase = phase - (2.0 * kPi * u / v) * freqs;
    const Eigen::ArrayXd transmit = (-optical).exp();
    const double spread = 1.0 / (4.0 * kPi * u);
    for (Eigen::Index i = 0; i < nb; ++i) {
      rb.carrier(i, k) = std::polar(spread * transmit(i), total_phase(i));
    }
    rb.alpha.col(k) = (sigma * du).unaryExpr([](double x) { return -std::expm1(-x); });
    const Eigen::ArrayXcd s = field.s_re.col(col).array().cast<Complex>() +
                              Complex(0.0, 1.0) * field.s_im.col(col).array().cast<Complex>();
    rb.contrib.col(k) = s * rb.carrier.col(k) * rb.alpha.col(k).cast<Complex>();
    optical += sigma * du;
    phase += field.beta.col(col).array() * du;
  }
  return rb;
}

void check_shapes(const FrequencyGrid& grid, const RaySet& rays, const FieldOutputs& field) {
  const auto nb = static_cast<Eigen::Index>(grid.n_bins());
  const auto np = static_cast<Eigen::Index>(rays.n_points());
  for (const Matrix* m : {&field.sigma, &field.beta, &field.s_re, &field.s_im}) {
    if (m->rows() != nb || m->cols() != np) {
      throw InvalidInput("composite: field output shape does not match grid/rays");
    }
  }
  if (rays.n_points() != rays.n_rays() * static_cast<std::size_t>(rays.samples_per_ray)) {
    throw InvalidInput("composite: malformed ray set");
  }
}

Eigen::ArrayXd frequency_array(const FrequencyGrid& grid) {
  const auto f = grid.frequencies();
  return Eigen::Map<const Eigen::ArrayXd>(f.data(), static_cast<Eigen::Index>(f.size()));
}

}  // namespace

RaySet build_rays(const SceneQuery& query, const RenderConfig& config, Rng* jitter) {
  config.validate();
  RaySet rays;
  rays.samples_per_ray = config.n_samples;
  const auto grid = make_direction_grid(config);
  const Vec3 axis = config.cardioid_axis.value_or(query.rx_orientation);
  for (const auto& d : grid) {
    double gain = 1.0;
    if (config.directivity == Directivity::kCardioid) gain = 0.5 * (1.0 + d.direction.dot(axis));
    append_ray(rays, query, d.direction, gain * d.weight / (4.0 * kPi), config, jitter);
  }
  return rays;
}

RaySet build_single_ray(const SceneQuery& query, const Vec3& direction, const RenderConfig& config,
                        Rng* jitter) {
  config.validate();
  if (!is_unit(direction)) throw InvalidInput("render_ray: direction must be unit-norm");
  RaySet rays;
  rays.samples_per_ray = config.n_samples;
  append_ray(rays, query, direction, 1.0, config, jitter);
  return rays;
}

std::vector<Complex> composite(const FrequencyGrid& grid, double speed_of_sound, const RaySet& rays,
                               const FieldOutputs& field) {
  check_shapes(grid, rays, field);
  const Eigen::ArrayXd freqs = frequency_array(grid);
  Eigen::ArrayXcd total = Eigen::ArrayXcd::Zero(freqs.size());
  for (std::size_t m = 0; m < rays.n_rays(); ++m) {
    const auto first = m * static_cast<std::size_t>(rays.samples_per_ray);
    const RayBins rb = evaluate_ray(freqs, speed_of_sound, rays, first, field);
    total += rays.ray_weights[m] * rb.contrib.rowwise().sum();
  }
  return {total.data(), total.data() + total.size()};
}

FieldOutputGrads composite_backward(const FrequencyGrid& grid, double speed_of_sound,
                                    const RaySet& rays, const FieldOutputs& field,
                                    std::span<const Complex> upstream) {
  check_shapes(grid, rays, field);
  const auto nb = static_cast<Eigen::Index>(grid.n_bins());
  if (upstream.size() != grid.n_bins()) throw InvalidInput("composite_backward: upstream length");
  const auto np = static_cast<Eigen::Index>(rays.n_points());
  FieldOutputGrads g{Matrix::Zero(nb, np), Matrix::Zero(nb, np), Matrix::Zero(nb, np),
                     Matrix::Zero(nb, np)};
  const Eigen::ArrayXd freqs = frequency_array(grid);
  const Eigen::Map<const Eigen::ArrayXcd> up(upstream.data(), nb);
  const int K = rays.samples_per_ray;

  for (std::size_t m = 0; m < rays.n_rays(); ++m) {
    const double w = rays.ray_weights[m];
    if (w == 0.0) continue;
    const Eigen::ArrayXcd gc = (w * up).conjugate();  // conj of ray-level upstream
    const auto first = m * static_cast<std::size_t>(K);
    const RayBins rb = evaluate_ray(freqs, speed_of_sound, rays, first, field);
    Eigen::ArrayXcd later = Eigen::ArrayXcd::Zero(nb);  // sum_{k>j} c_k
    for (int j = K; j-- > 0;) {
      const std::size_t idx = first + static_cast<std::size_t>(j);
      const auto col = static_cast<Eigen::Index>(idx);
      const double du = rays.step[idx];
      const Eigen::ArrayXcd s = field.s_re.col(col).array().cast<Complex>() +
                                Complex(0.0, 1.0) * field.s_im.col(col).array().cast<Complex>();
      // dH/dS_j = carrier * alpha; dL/dS = g * conj(dH/dS).
      const Eigen::ArrayXcd ds =
          (gc * rb.carrier.col(j) * rb.alpha.col(j).cast<Complex>()).conjugate();
      g.s_re.col(col) = ds.real().matrix();
      g.s_im.col(col) = ds.imag().matrix();
      // dH/dsigma_j = S_j carrier_j du (1 - alpha_j) - du * later
      const Eigen::ArrayXcd dh_sigma =
          s * rb.carrier.col(j) * (du * (1.0 - rb.alpha.col(j))).cast<Complex>() - du * later;
      g.sigma.col(col) = (gc * dh_sigma).real().matrix();
      // dH/dbeta_j = j du later
      g.beta.col(col) = (gc * (Complex(0.0, du) * later)).real().matrix();
      later += rb.contrib.col(j);
    }
  }
  return g;
}

ComplexSpectrum render_ray(const SceneQuery& query, const Vec3& direction,
                           const FieldParams& params, const RenderConfig& config,
                           const FrequencyGrid& grid) {
  if (grid.n_bins() != params.config.n_bins)
    throw InvalidInput("render_ray: grid/field bin mismatch");
  const RaySet rays = build_single_ray(query, direction, config, nullptr);
  const FieldOutputs out =
      evaluate_field(params, rays.positions, query.p_tx, rays.directions, query.n_tx, nullptr);
  return ComplexSpectrum(grid, composite(grid, config.speed_of_sound, rays, out));
}

ComplexSpectrum render_receiver(const SceneQuery& query, const FieldParams& params,
                                const RenderConfig& config, const FrequencyGrid& grid, Rng* jitter,
                                RenderTape* tape) {
  if (grid.n_bins() != params.config.n_bins) {
    throw InvalidInput("render_receiver: grid/field bin mismatch");
  }
  RaySet rays = build_rays(query, config, jitter);
  FieldTape* ftape = tape ? &tape->field_tape : nullptr;
  FieldOutputs out =
      evaluate_field(params, rays.positions, query.p_tx, rays.directions, query.n_tx, ftape);
  ComplexSpectrum h(grid, composite(grid, config.speed_of_sound, rays, out));
  if (tape) {
    tape->query = query;
    tape->rays = std::move(rays);
    tape->outputs = std::move(out);
  }
  return h;
}

void render_backward(const FieldParams& params, const RenderConfig& config,
                     const FrequencyGrid& grid, const RenderTape& tape,
                     std::span<const Complex> upstream, FieldParams& grad,
                     const FieldOutputGrads* extra) {
  FieldOutputGrads g =
      composite_backward(grid, config.speed_of_sound, tape.rays, tape.outputs, upstream);
  if (extra) {
    g.sigma += extra->sigma;
    g.beta += extra->beta;
    g.s_re += extra->s_re;
    g.s_im += extra->s_im;
  }
  field_backward(params, tape.field_tape, g, grad);
}

}  // namespace freqfield
