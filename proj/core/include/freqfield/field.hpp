// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <Eigen/Core>
#include <cstdint>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "freqfield/encoding.hpp"
#include "freqfield/geometry.hpp"
#include "freqfield/random.hpp"
#include "freqfield/spectra.hpp"

namespace freqfield {

using Matrix = Eigen::MatrixXd;
using Vector = Eigen::VectorXd;

// Emitter and receiver poses for one rendering task.
struct SceneQuery {
  Vec3 p_tx = Vec3::Zero();
  Vec3 n_tx = Vec3::UnitX();
  Vec3 p_rx = Vec3::Zero();
  Vec3 rx_orientation = Vec3::UnitX();

  // Throws InvalidInput when a direction is not unit-norm within 1e-9.
  void validate() const;
};

struct FieldConfig {
  HashGridConfig encoding;  // shared by the position and source tables
  std::size_t n_bins = 257;
  int hidden_width = 256;
  int hidden_layers = 6;
  int feature_width = 64;
  int direction_frequencies = 4;
  double sigma_bias = 0.1;   // pre-softplus bias of the sigma head
  double table_init = 1e-4;  // hash table init half-range

  void validate() const;
  [[nodiscard]] std::size_t attenuation_input_dim() const { return 2 * encoding.output_dim(); }
  [[nodiscard]] std::size_t attenuation_output_dim() const {
    return 2 * n_bins + static_cast<std::size_t>(feature_width);
  }
  [[nodiscard]] std::size_t emission_input_dim() const {
    return static_cast<std::size_t>(feature_width) +
           2 * direction_encoding_dim(direction_frequencies);
  }
  [[nodiscard]] std::size_t emission_output_dim() const { return 2 * n_bins; }

  friend bool operator==(const FieldConfig&, const FieldConfig&) = default;
};

struct DenseLayer {
  Matrix weight;  // out x in
  Vector bias;
};

// `hidden_layers` ReLU layers followed by a linear head.
struct Mlp {
  std::vector<DenseLayer> layers;
};

// Every trainable tensor of the field. Gradient buffers are a second
// FieldParams of identical shape (see zeros_like).
struct FieldParams {
  FieldConfig config;
  HashGridTables position_table;
  HashGridTables source_table;
  Mlp attenuation;
  Mlp emission;
  double kk_scale = 1.0;

  static FieldParams initialize(const FieldConfig& config, Rng& rng);
  [[nodiscard]] FieldParams zeros_like() const;
  void set_zero();

  // f(name, values) over all tensors in a fixed order.
  template <class F>
  void for_each_tensor(F&& f);
  template <class F>
  void for_each_tensor(F&& f) const;

  [[nodiscard]] std::size_t parameter_count() const;
};

// Per-point attenuation: sigma >= 0 (1/m), beta (rad/m).
struct AttenuationSample {
  std::vector<double> sigma;
  std::vector<double> beta;
};

struct EmissionSample {
  std::vector<Complex> s;
};

// Batched field outputs; column j belongs to point j.
struct FieldOutputs {
  Matrix sigma;  // n_bins x P
  Matrix beta;   // n_bins x P
  Matrix s_re;   // n_bins x P
  Matrix s_im;   // n_bins x P
};

// Gradients of a scalar loss with respect to FieldOutputs (same shapes).
using FieldOutputGrads = FieldOutputs;

// Forward intermediates retained for field_backward.
struct FieldTape {
  std::vector<Vec3> positions;
  Vec3 p_tx = Vec3::Zero();
  std::vector<Matrix> attenuation_inputs;  // input of each layer
  Matrix sigma_raw;
  std::vector<Matrix> emission_inputs;
};

// Attenuation branch for one point. Returns the sample and the feature
// vector handed to the emission branch.
std::pair<AttenuationSample, std::vector<double>> eval_attenuation(const Vec3& p, const Vec3& p_tx,
                                                                   const FieldParams& params);

EmissionSample eval_emission(std::span<const double> features, const Vec3& n_dir, const Vec3& n_tx,
                             const FieldParams& params);

// Evaluates both branches on a batch. directions[j] is the emission
// direction for positions[j]. Fills `tape` when non-null.
FieldOutputs evaluate_field(const FieldParams& params, std::span<const Vec3> positions,
                            const Vec3& p_tx, std::span<const Vec3> directions, const Vec3& n_tx,
                            FieldTape* tape);

// Accumulates d(loss)/d(params) into `grad` given output gradients. kk_scale
// is left untouched.
void field_backward(const FieldParams& params, const FieldTape& tape,
                    const FieldOutputGrads& upstream, FieldParams& grad);

// Rounds every tensor to the nearest float32 value (the checkpoint storage
// precision).
void round_to_storage(FieldParams& params);

// ---------------------------------------------------------------------------

template <class F>
void FieldParams::for_each_tensor(F&& f) {
  f(std::string("position_table"), std::span<double>(position_table.values));
  f(std::string("source_table"), std::span<double>(source_table.values));
  auto visit_mlp = [&f](const std::string& prefix, Mlp& mlp) {
    for (std::size_t i = 0; i < mlp.layers.size(); ++i) {
      auto& layer = mlp.layers[i];
      f(prefix + "." + std::to_string(i) + ".weight",
        std::span<double>(layer.weight.data(), static_cast<std::size_t>(layer.weight.size())));
      f(prefix + "." + std::to_string(i) + ".bias",
        std::span<double>(layer.bias.data(), static_cast<std::size_t>(layer.bias.size())));
    }
  };
  visit_mlp("attenuation", attenuation);
  visit_mlp("emission", emission);
  f(std::string("kk_scale"), std::span<double>(&kk_scale, 1));
}

template <class F>
void FieldParams::for_each_tensor(F&& f) const {
  const_cast<FieldParams*>(this)->for_each_tensor(
      [&f](const std::string& name, std::span<double> v) {
        f(name, std::span<const double>(v.data(), v.size()));
      });
}

}  // namespace freqfield
