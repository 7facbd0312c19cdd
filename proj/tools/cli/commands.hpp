// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <cstdint>
#include <filesystem>
#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

#include "freqfield/config_io.hpp"
#include "freqfield/metrics.hpp"

namespace freqfield::cli {

// Process exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;
inline constexpr int kExitNumerical = 4;

struct ConfigOptions {
  std::optional<std::filesystem::path> config;
  std::string preset = "desk";
  std::optional<std::uint64_t> seed;
  std::optional<std::string> weights;
};

// Preset, then config file, then command-line overrides; finalized and
// validated.
RunConfig resolve_config(const ConfigOptions& options);

struct GenerateCommand {
  ConfigOptions config;
  std::filesystem::path out;
};

struct TrainCommand {
  ConfigOptions config;
  std::filesystem::path dataset;
  std::filesystem::path out;
  std::optional<std::filesystem::path> resume;
  std::optional<std::int64_t> steps;
  std::int64_t log_every = 50;
};

struct EvalCommand {
  std::optional<std::filesystem::path> checkpoint;
  std::filesystem::path dataset;
  std::filesystem::path out;
  bool self_test = false;
  std::vector<double> bands = kDefaultBandCenters;
  std::optional<double> band_width_hz;
};

struct RenderMapCommand {
  ConfigOptions config;
  std::optional<std::filesystem::path> checkpoint;
  std::optional<std::filesystem::path> dataset;  // source position and scene
  bool ground_truth = false;
  bool free_field = false;
  std::string plane = "z=0.6";
  int n_u = 32;
  int n_v = 24;
  double freq_hz = 720.0;
  std::filesystem::path out;
};

void run_generate(const GenerateCommand& cmd, std::ostream& log);
void run_train(const TrainCommand& cmd, std::ostream& log);
void run_eval(const EvalCommand& cmd, std::ostream& log);
void run_render_map(const RenderMapCommand& cmd, std::ostream& log);

// Spectrum of the nearest training receiver (ties go to the lower index)
// for every held-out receiver.
std::vector<ComplexSpectrum> nearest_neighbor_baseline(const OracleDataset& dataset);

// Midpoint-sampled renders of every held-out receiver.
std::vector<ComplexSpectrum> render_held_out(const Checkpoint& ckpt, const OracleDataset& dataset);

std::vector<ComplexSpectrum> held_out_truth(const OracleDataset& dataset);

}  // namespace freqfield::cli
