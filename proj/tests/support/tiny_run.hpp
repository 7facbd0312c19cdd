// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

// A scaled-down scene, dataset and model for fast training tests.

#pragma once

#include "field_fixtures.hpp"
#include "freqfield/oracle.hpp"
#include "freqfield/renderer.hpp"
#include "freqfield/trainer.hpp"

namespace freqfield::testing {

struct TinyRun {
  OracleDataset dataset;
  TrainConfig train;
  RenderConfig render;
  FieldConfig field;

  [[nodiscard]] Checkpoint initial() const {
    return Checkpoint::initial(train, render, field, dataset.grid);
  }
};

inline TinyRun tiny_run(std::uint64_t seed = 0) {
  TinyRun t;
  DatasetSpec spec;
  spec.grid = FrequencyGrid(64, 4000.0);
  spec.receiver_counts = {3, 2, 2};
  spec.seed = seed;
  ShoeboxScene scene = ShoeboxScene::desk();
  scene.max_image_order = 1;
  t.dataset = generate_dataset(scene, spec);
  t.field = small_field_config(t.dataset.grid.n_bins());
  t.render.n_samples = 4;
  t.render.n_azimuth = 3;
  t.render.n_elevation = 2;
  t.render.t_far = 1.5;
  t.train.batch_size = 2;
  t.train.n_steps = 6;
  t.train.checkpoint_every = 3;
  t.train.kk_points = 8;
  t.train.seed = seed;
  return t;
}

}  // namespace freqfield::testing
