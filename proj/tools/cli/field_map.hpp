// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <string>
#include <vector>

#include "freqfield/oracle.hpp"
#include "freqfield/trainer.hpp"

namespace freqfield::cli {

// Axis-aligned slice through the room: `axis` is held at `offset`, the other
// two axes (in x, y, z order) span the room at cell centres.
struct PlaneSpec {
  int axis = 2;
  double offset = 0.0;
  int n_u = 32;
  int n_v = 24;

  // "z=0.6" style; throws ConfigError.
  static PlaneSpec parse(const std::string& text, int n_u, int n_v);
  [[nodiscard]] int u_axis() const { return axis == 0 ? 1 : 0; }
  [[nodiscard]] int v_axis() const { return axis == 2 ? 1 : 2; }
};

struct FieldMap {
  PlaneSpec plane;
  std::size_t bin = 0;
  double bin_hz = 0.0;
  std::vector<Vec3> points;     // row-major, v outer, u inner
  std::vector<Complex> values;  // H at `bin` for each point
};

// Throws ConfigError when the plane leaves the room or the frequency is
// outside [0, Nyquist].
std::vector<Vec3> plane_points(const PlaneSpec& plane, const ShoeboxScene& scene);
std::size_t frequency_bin(const FrequencyGrid& grid, double freq_hz);

FieldMap ground_truth_map(const ShoeboxScene& scene, const SceneQuery& source,
                          const FrequencyGrid& grid, double speed_of_sound, const PlaneSpec& plane,
                          double freq_hz);
FieldMap model_map(const Checkpoint& ckpt, const ShoeboxScene& scene, const SceneQuery& source,
                   const PlaneSpec& plane, double freq_hz);

// magnitude.pgm (log scale), phase.pgm and field_map.csv (u, v, re, im).
void write_field_map(const FieldMap& map, const std::filesystem::path& dir);

// Binary 8-bit PGM; `pixels` row-major with width * height entries.
std::string encode_pgm(int width, int height, const std::vector<unsigned char>& pixels);

}  // namespace freqfield::cli
