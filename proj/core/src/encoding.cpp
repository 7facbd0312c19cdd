// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "freqfield/encoding.hpp"

#include <algorithm>
#include <bit>
#include <cmath>
#include <numbers>

#include "freqfield/error.hpp"

namespace freqfield {

namespace {
constexpr std::uint32_t kPrimeX = 73856093u;
constexpr std::uint32_t kPrimeY = 19349663u;
constexpr std::uint32_t kPrimeZ = 83492791u;
}  // namespace

void HashGridConfig::validate() const {
  if (n_levels < 1) throw ConfigError("hash grid: n_levels must be >= 1");
  if (base_resolution < 1) throw ConfigError("hash grid: base_resolution must be >= 1");
  if (!(growth_factor > 1.0)) throw ConfigError("hash grid: growth_factor must be > 1");
  if (table_size == 0 || !std::has_single_bit(table_size)) {
    throw ConfigError("hash grid: table_size must be a power of two");
  }
  if (feature_dim < 1) throw ConfigError("hash grid: feature_dim must be >= 1");
  if (bounds.degenerate()) throw ConfigError("hash grid: bounds are degenerate");
}

int HashGridConfig::resolution(int level) const {
  return static_cast<int>(
      std::floor(static_cast<double>(base_resolution) * std::pow(growth_factor, level)));
}

std::span<double> HashGridTables::row(const HashGridConfig& config, int level, std::uint32_t slot) {
  const auto fd = static_cast<std::size_t>(config.feature_dim);
  const std::size_t offset = (static_cast<std::size_t>(level) * config.table_size + slot) * fd;
  return {values.data() + offset, fd};
}

std::span<const double> HashGridTables::row(const HashGridConfig& config, int level,
                                            std::uint32_t slot) const {
  const auto fd = static_cast<std::size_t>(config.feature_dim);
  const std::size_t offset = (static_cast<std::size_t>(level) * config.table_size + slot) * fd;
  return {values.data() + offset, fd};
}

void init_tables(HashGridTables& tables, double scale, std::mt19937_64& rng) {
  // 53-bit uniform in [0,1), portable across standard libraries.
  for (double& v : tables.values) {
    const double u = static_cast<double>(rng() >> 11) * 0x1.0p-53;
    v = (2.0 * u - 1.0) * scale;
  }
}

std::uint32_t hash_vertex(std::uint32_t ix, std::uint32_t iy, std::uint32_t iz,
                          std::uint32_t table_size) {
  return ((ix * kPrimeX) ^ (iy * kPrimeY) ^ (iz * kPrimeZ)) & (table_size - 1u);
}

LevelStencil level_stencil(const Vec3& position, int level, const HashGridConfig& config) {
  const int res = config.resolution(level);
  const Vec3 extent = config.bounds.extent();
  std::array<std::uint32_t, 3> cell{};
  std::array<double, 3> frac{};
  for (int a = 0; a < 3; ++a) {
    double t = (position[a] - config.bounds.lo[a]) / extent[a];
    t = std::clamp(t, 0.0, 1.0);
    const double scaled = t * res;
    const int c = std::min(static_cast<int>(std::floor(scaled)), res - 1);
    cell[a] = static_cast<std::uint32_t>(c);
    frac[a] = scaled - c;
  }
  LevelStencil st;
  for (int corner = 0; corner < 8; ++corner) {
    const std::uint32_t dx = corner & 1, dy = (corner >> 1) & 1, dz = (corner >> 2) & 1;
    st.slot[corner] = hash_vertex(cell[0] + dx, cell[1] + dy, cell[2] + dz, config.table_size);
    st.weight[corner] = (dx ? frac[0] : 1.0 - frac[0]) * (dy ? frac[1] : 1.0 - frac[1]) *
                        (dz ? frac[2] : 1.0 - frac[2]);
  }
  return st;
}

void encode(const Vec3& position, const HashGridTables& tables, const HashGridConfig& config,
            std::span<double> out) {
  const auto fd = static_cast<std::size_t>(config.feature_dim);
  if (out.size() != config.output_dim() || tables.values.size() != config.parameter_count()) {
    throw InvalidInput("encode: buffer sizes do not match config");
  }
  std::fill(out.begin(), out.end(), 0.0);
  for (int level = 0; level < config.n_levels; ++level) {
    const LevelStencil st = level_stencil(position, level, config);
    double* dst = out.data() + static_cast<std::size_t>(level) * fd;
    for (int corner = 0; corner < 8; ++corner) {
      const auto src = tables.row(config, level, st.slot[corner]);
      for (std::size_t f = 0; f < fd; ++f) dst[f] += st.weight[corner] * src[f];
    }
  }
}

std::vector<double> encode(const Vec3& position, const HashGridTables& tables,
                           const HashGridConfig& config) {
  std::vector<double> out(config.output_dim());
  encode(position, tables, config, out);
  return out;
}

void encode_backward(const Vec3& position, std::span<const double> upstream, HashGridTables& grad,
                     const HashGridConfig& config) {
  const auto fd = static_cast<std::size_t>(config.feature_dim);
  if (upstream.size() != config.output_dim() || grad.values.size() != config.parameter_count()) {
    throw InvalidInput("encode_backward: buffer sizes do not match config");
  }
  for (int level = 0; level < config.n_levels; ++level) {
    const double* g = upstream.data() + static_cast<std::size_t>(level) * fd;
    if (std::all_of(g, g + fd, [](double x) { return x == 0.0; })) continue;
    const LevelStencil st = level_stencil(position, level, config);
    for (int corner = 0; corner < 8; ++corner) {
      if (st.weight[corner] == 0.0) continue;
      auto dst = grad.row(config, level, st.slot[corner]);
      for (std::size_t f = 0; f < fd; ++f) dst[f] += st.weight[corner] * g[f];
    }
  }
}

void encode_direction(const Vec3& direction, int n_frequencies, std::span<double> out) {
  if (out.size() != direction_encoding_dim(n_frequencies)) {
    throw InvalidInput("encode_direction: output size mismatch");
  }
  std::size_t i = 0;
  for (int k = 0; k < n_frequencies; ++k) {
    const double scale = std::ldexp(std::numbers::pi, k);
    for (int a = 0; a < 3; ++a) {
      out[i++] = std::sin(scale * direction[a]);
      out[i++] = std::cos(scale * direction[a]);
    }
  }
}

}  // namespace freqfield
