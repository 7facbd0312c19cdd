// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "freqfield/field.hpp"
#include "freqfield/losses.hpp"
#include "freqfield/oracle.hpp"
#include "freqfield/random.hpp"
#include "freqfield/renderer.hpp"

namespace freqfield {

// Loss configuration as stored in config files and checkpoints; the per-bin
// vectors are materialized against a grid.
struct LossSettings {
  WeightProfile profile;
  double lambda_spec = 1.0;
  double lambda_mag = 1.0;
  double lambda_phase = 1.0;
  double lambda_env = 0.5;
  double lambda_kk = 0.01;
  double env_alpha = 0.1;
  double env_epsilon = 1e-6;
  double kk_taper_fraction = 0.1;

  [[nodiscard]] LossWeights weights(const FrequencyGrid& grid) const;
  [[nodiscard]] KKContext kk_context(std::size_t n_bins) const;
};

struct AdamConfig {
  double learning_rate = 5e-4;
  double beta1 = 0.9;
  double beta2 = 0.999;
  double epsilon = 1e-8;
};

struct TrainConfig {
  AdamConfig adam;
  int batch_size = 4;
  std::int64_t n_steps = 2000;
  std::uint64_t seed = 0;
  std::int64_t checkpoint_every = 500;
  double grad_clip_norm = 10.0;  // <= 0 disables clipping
  int kk_points = 64;
  LossSettings loss;

  void validate() const;
};

// Bias-corrected Adam on flat buffers; `step` is the 1-based update count.
void adam_step(std::span<double> params, std::span<const double> grads, std::span<double> m,
               std::span<double> v, std::int64_t step, const AdamConfig& config);

// Whole-model version; tensors are matched by position.
void adam_step(FieldParams& params, const FieldParams& grads, FieldParams& m, FieldParams& v,
               std::int64_t step, const AdamConfig& config);

double global_norm(const FieldParams& grads);
void scale_gradients(FieldParams& grads, double factor);

// Complete training state. Parameters and moments hold float32-representable
// values so the checkpoint payload is lossless.
struct Checkpoint {
  static constexpr int kFormatVersion = 1;

  TrainConfig train;
  RenderConfig render;
  FrequencyGrid grid;
  FieldParams params;
  FieldParams adam_m;
  FieldParams adam_v;
  std::int64_t step = 0;
  Rng rng;

  // Fresh parameters for `field` drawn from train.seed.
  static Checkpoint initial(const TrainConfig& train, const RenderConfig& render,
                            const FieldConfig& field, const FrequencyGrid& grid);
};

// Versioned binary container: magic, version, JSON header length, JSON
// header (configs, step, RNG state, tensor directory), little-endian float32
// payload.
std::vector<unsigned char> serialize_checkpoint(const Checkpoint& ckpt);
Checkpoint deserialize_checkpoint(std::span<const unsigned char> bytes);
void save_checkpoint(const Checkpoint& ckpt, const std::filesystem::path& path);
Checkpoint load_checkpoint(const std::filesystem::path& path);

struct StepLog {
  std::int64_t step = 0;  // step count after the update
  LossBreakdown loss;
  double grad_norm = 0.0;
  double wall_ms = 0.0;
};

// Executes training steps against one dataset. The only writer of the
// checkpoint's parameters.
class Trainer {
 public:
  Trainer(const OracleDataset& dataset, Checkpoint start);

  // One Adam update. Throws NumericalError (after writing abort_dump.json
  // into dump_dir, when set) if any loss term or the gradient norm is
  // non-finite or exceeds the float32 range.
  StepLog step();

  [[nodiscard]] const Checkpoint& checkpoint() const { return ckpt_; }
  void set_dump_dir(std::filesystem::path dir) { dump_dir_ = std::move(dir); }

 private:
  const OracleDataset& dataset_;
  Checkpoint ckpt_;
  LossWeights weights_;
  KKContext kk_ctx_;
  FieldParams grads_;
  std::optional<std::filesystem::path> dump_dir_;
};

struct TrainOptions {
  std::optional<std::filesystem::path> out_dir;  // checkpoints + train_log.csv
  std::function<void(const StepLog&)> on_step;
};

// Runs until ckpt.step == train.n_steps, checkpointing every
// checkpoint_every steps and at the end. Returns the final state.
Checkpoint train(const OracleDataset& dataset, Checkpoint start, const TrainOptions& options = {});

// CSV header written to train_log.csv.
std::string train_log_header();
std::string train_log_row(const StepLog& log);

}  // namespace freqfield
