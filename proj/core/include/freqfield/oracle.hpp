// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <array>
#include <cstdint>
#include <filesystem>
#include <utility>
#include <vector>

#include "freqfield/field.hpp"
#include "freqfield/geometry.hpp"
#include "freqfield/spectra.hpp"

namespace freqfield {

// Homogeneous propagation medium of the analytic scenes.
struct Medium {
  enum class Kind { kLossless, kPowerLaw };
  Kind kind = Kind::kLossless;
  double a0 = 0.0;        // absorption at the reference frequency, 1/m
  double exponent = 1.0;  // power-law exponent y, 0 < y < 2, y != 1
  double reference_hz = 1000.0;

  friend bool operator==(const Medium&, const Medium&) = default;
};

enum class Wall { kXMin = 0, kXMax, kYMin, kYMax, kZMin, kZMax };

// Rectangular room with one corner at the origin.
struct ShoeboxScene {
  Vec3 dimensions = Vec3(2.0, 1.5, 1.2);
  // One entry per wall (Wall order); each is a scalar (size 1) or a
  // per-bin vector.
  std::array<std::vector<double>, 6> reflection{{{0.7}, {0.7}, {0.7}, {0.7}, {0.7}, {0.7}}};
  int max_image_order = 3;
  Medium medium;

  static ShoeboxScene desk() { return ShoeboxScene{}; }
  static ShoeboxScene free_field_scene(const Vec3& dimensions);

  [[nodiscard]] Box3 box() const { return Box3{Vec3::Zero(), dimensions}; }
  void set_reflection(double r);
  [[nodiscard]] double reflection_at(Wall wall, std::size_t bin) const;
  // Throws ConfigError for invalid coefficients, dimensions or medium.
  void validate(std::size_t n_bins) const;

  friend bool operator==(const ShoeboxScene&, const ShoeboxScene&) = default;
};

// (1 / (4 pi r)) exp(-j 2 pi f r / v) per bin. Throws InvalidInput for r <= 0.
ComplexSpectrum free_field(double r, const FrequencyGrid& grid, double speed_of_sound);

// Power-law absorption sigma(f) = a0 (f / f0)^y and its dispersion partner
// beta = hilbert_kk(sigma) evaluated on a 4x finer grid and decimated.
std::pair<std::vector<double>, std::vector<double>> kk_pair_power_law(double a0, double exponent,
                                                                      double reference_hz,
                                                                      const FrequencyGrid& grid,
                                                                      double taper_fraction = 0.1);

struct ImageSource {
  Vec3 position;
  std::array<int, 6> wall_hits{};  // reflections per wall (Wall order)
  [[nodiscard]] int order() const;
};

// All images of `source` with reflection order <= max_order, in a fixed
// enumeration order (the direct source included).
std::vector<ImageSource> enumerate_images(const Vec3& source, const Vec3& dimensions,
                                          int max_order);

// Sum over image sources of the free-field term, scaled by the wall
// reflection products and, for a lossy medium, by exp(-sigma r + j beta r).
ComplexSpectrum image_source_response(const ShoeboxScene& scene, const SceneQuery& query,
                                      const FrequencyGrid& grid, double speed_of_sound);

// Receivers at the cell centers of a counts[0] x counts[1] x counts[2]
// lattice over the room.
struct DatasetSpec {
  FrequencyGrid grid{512, 16000.0};
  double speed_of_sound = 343.0;
  Vec3 source = Vec3(0.35, 0.5, 0.4);
  Vec3 source_orientation = Vec3::UnitX();
  Vec3 receiver_orientation = Vec3::UnitX();
  std::array<int, 3> receiver_counts{6, 6, 6};
  double split_ratio = 0.8;  // fraction kept for training
  std::uint64_t seed = 0;
};

struct OracleDataset {
  static constexpr int kFormatVersion = 1;

  FrequencyGrid grid;
  double speed_of_sound = 343.0;
  ShoeboxScene scene;
  DatasetSpec spec;
  std::vector<SceneQuery> queries;
  std::vector<ComplexSpectrum> spectra;  // float32-rounded when loaded from disk
  std::vector<std::size_t> train;
  std::vector<std::size_t> held_out;

  [[nodiscard]] std::size_t size() const { return queries.size(); }
};

// held_out = floor((1 - ratio) n), train = n - held_out. Deterministic
// Fisher-Yates on the seed; both lists returned sorted.
std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n,
                                                                            double ratio,
                                                                            std::uint64_t seed);

std::vector<Vec3> receiver_lattice(const ShoeboxScene& scene, const std::array<int, 3>& counts);

OracleDataset generate_dataset(const ShoeboxScene& scene, const DatasetSpec& spec);

// manifest.json + spectra.bin + queries.bin. Throws DataError on I/O failure.
void write_dataset(const OracleDataset& dataset, const std::filesystem::path& dir);
OracleDataset read_dataset(const std::filesystem::path& dir);

}  // namespace freqfield
