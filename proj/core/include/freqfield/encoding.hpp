// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <random>
#include <span>
#include <vector>

#include "freqfield/geometry.hpp"

namespace freqfield {

struct HashGridConfig {
  int n_levels = 8;
  int base_resolution = 4;
  double growth_factor = 1.5;
  std::uint32_t table_size = 1u << 14;
  int feature_dim = 2;
  Box3 bounds;

  // Throws ConfigError on a malformed config.
  void validate() const;
  [[nodiscard]] int resolution(int level) const;
  [[nodiscard]] std::size_t output_dim() const {
    return static_cast<std::size_t>(n_levels) * static_cast<std::size_t>(feature_dim);
  }
  [[nodiscard]] std::size_t parameter_count() const { return output_dim() * table_size; }

  friend bool operator==(const HashGridConfig& a, const HashGridConfig& b) {
    return a.n_levels == b.n_levels && a.base_resolution == b.base_resolution &&
           a.growth_factor == b.growth_factor && a.table_size == b.table_size &&
           a.feature_dim == b.feature_dim && a.bounds.lo == b.bounds.lo &&
           a.bounds.hi == b.bounds.hi;
  }
};

// Trainable feature tables, stored level-major: [level][slot][feature].
struct HashGridTables {
  std::vector<double> values;

  HashGridTables() = default;
  explicit HashGridTables(const HashGridConfig& config) : values(config.parameter_count(), 0.0) {}

  [[nodiscard]] std::span<double> row(const HashGridConfig& config, int level, std::uint32_t slot);
  [[nodiscard]] std::span<const double> row(const HashGridConfig& config, int level,
                                            std::uint32_t slot) const;
};

// Uniform init in [-scale, scale].
void init_tables(HashGridTables& tables, double scale, std::mt19937_64& rng);

// The 8 cell corners touched by one level, with their table slots and
// trilinear weights.
struct LevelStencil {
  std::array<std::uint32_t, 8> slot{};
  std::array<double, 8> weight{};
};

// Spatial hash of an integer vertex: coordinate-wise products with large odd
// primes, XOR-combined, masked to the table size.
std::uint32_t hash_vertex(std::uint32_t ix, std::uint32_t iy, std::uint32_t iz,
                          std::uint32_t table_size);

// Interpolation stencil for `position` at `level`; positions outside the
// bounds are clamped onto the boundary.
LevelStencil level_stencil(const Vec3& position, int level, const HashGridConfig& config);

// Concatenated per-level interpolated features; out.size() == config.output_dim().
void encode(const Vec3& position, const HashGridTables& tables, const HashGridConfig& config,
            std::span<double> out);
std::vector<double> encode(const Vec3& position, const HashGridTables& tables,
                           const HashGridConfig& config);

// Adds weight * upstream into the table rows touched by `position`.
void encode_backward(const Vec3& position, std::span<const double> upstream, HashGridTables& grad,
                     const HashGridConfig& config);

// Sinusoidal encoding for unit vectors: for k in [0, n_frequencies) and each
// component c, (sin(2^k pi c), cos(2^k pi c)). Output size 6 * n_frequencies.
void encode_direction(const Vec3& direction, int n_frequencies, std::span<double> out);
inline std::size_t direction_encoding_dim(int n_frequencies) {
  return 6u * static_cast<std::size_t>(n_frequencies);
}

}  // namespace freqfield
