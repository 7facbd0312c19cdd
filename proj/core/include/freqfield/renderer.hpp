// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <optional>
#include <span>
#include <vector>

#include "freqfield/field.hpp"
#include "freqfield/geometry.hpp"
#include "freqfield/random.hpp"
#include "freqfield/spectra.hpp"

namespace freqfield {

enum class Directivity { kOmni, kCardioid };

struct RenderConfig {
  int n_samples = 16;
  int n_azimuth = 16;
  int n_elevation = 8;
  double t_near = 0.05;
  double t_far = 2.5;
  double speed_of_sound = 343.0;
  Directivity directivity = Directivity::kOmni;
  // Cardioid axis; falls back to the query's rx_orientation when unset.
  std::optional<Vec3> cardioid_axis;
  // Stratified-jittered depths when a jitter RNG is supplied and this is set.
  bool jitter = true;

  void validate() const;
  [[nodiscard]] int n_directions() const { return n_azimuth * n_elevation; }

  static RenderConfig desk();
  static RenderConfig full();
};

struct DirectionSample {
  Vec3 direction;
  double weight = 0.0;  // solid angle, sr
};

// Azimuth-elevation grid. Each weight is the exact solid angle of its cell,
// so the weights sum to 4 pi.
std::vector<DirectionSample> make_direction_grid(const RenderConfig& config);

// Sample geometry for every ray of one receiver, ray-major: sample k of ray
// m sits at index m * samples_per_ray + k.
struct RaySet {
  int samples_per_ray = 0;
  std::vector<Vec3> ray_directions;
  std::vector<double> ray_weights;  // directivity gain x normalized quadrature weight
  std::vector<Vec3> positions;
  std::vector<Vec3> directions;  // per sample, equal to its ray direction
  std::vector<double> depth;     // u_k
  std::vector<double> step;      // du_k

  [[nodiscard]] std::size_t n_rays() const { return ray_directions.size(); }
  [[nodiscard]] std::size_t n_points() const { return positions.size(); }
};

// Midpoint depths unless `jitter` is non-null and config.jitter is set.
RaySet build_rays(const SceneQuery& query, const RenderConfig& config, Rng* jitter);
// A single ray with weight 1.
RaySet build_single_ray(const SceneQuery& query, const Vec3& direction, const RenderConfig& config,
                        Rng* jitter);

// Accumulates
//   H(f) = sum_m w_m sum_k S_k(f) exp(-j 2 pi f u_k / v) / (4 pi u_k)
//                             * exp(j phi_k(f)) alpha_k(f) T_k(f)
// with alpha_k = 1 - exp(-sigma_k du_k), T_k = prod_{j<k} (1 - alpha_j),
// phi_k = sum_{j<k} beta_j du_j.
std::vector<Complex> composite(const FrequencyGrid& grid, double speed_of_sound, const RaySet& rays,
                               const FieldOutputs& field);

// Gradient of a real loss with respect to the field outputs, given
// upstream = dL/dRe H + j dL/dIm H.
FieldOutputGrads composite_backward(const FrequencyGrid& grid, double speed_of_sound,
                                    const RaySet& rays, const FieldOutputs& field,
                                    std::span<const Complex> upstream);

// Everything render_backward needs from the forward pass.
struct RenderTape {
  SceneQuery query;
  RaySet rays;
  FieldOutputs outputs;
  FieldTape field_tape;
};

ComplexSpectrum render_ray(const SceneQuery& query, const Vec3& direction,
                           const FieldParams& params, const RenderConfig& config,
                           const FrequencyGrid& grid);

ComplexSpectrum render_receiver(const SceneQuery& query, const FieldParams& params,
                                const RenderConfig& config, const FrequencyGrid& grid,
                                Rng* jitter = nullptr, RenderTape* tape = nullptr);

// Backpropagates `upstream` through the compositing and the field into
// `grad`. `extra`, when given, is added to the field-output gradients first
// (used to inject regularizer gradients on the same samples).
void render_backward(const FieldParams& params, const RenderConfig& config,
                     const FrequencyGrid& grid, const RenderTape& tape,
                     std::span<const Complex> upstream, FieldParams& grad,
                     const FieldOutputGrads* extra = nullptr);

}  // namespace freqfield
