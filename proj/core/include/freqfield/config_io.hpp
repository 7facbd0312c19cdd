// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#pragma once

#include <filesystem>
#include <nlohmann/json.hpp>
#include <string>

#include "freqfield/encoding.hpp"
#include "freqfield/field.hpp"
#include "freqfield/oracle.hpp"
#include "freqfield/renderer.hpp"
#include "freqfield/trainer.hpp"

namespace freqfield {

using Json = nlohmann::ordered_json;

// JSON mappings. Readers start from the receiving object's current values,
// override the keys present and throw ConfigError naming the key path on
// unknown keys or wrong types.
Json to_json(const FrequencyGrid& grid);
Json to_json(const Box3& box);
Json to_json(const HashGridConfig& config);
Json to_json(const FieldConfig& config);
Json to_json(const RenderConfig& config);
Json to_json(const Medium& medium);
Json to_json(const ShoeboxScene& scene);
Json to_json(const DatasetSpec& spec);
Json to_json(const LossSettings& loss);
Json to_json(const TrainConfig& config);
Json to_json(const SceneQuery& query);

void read_json(const Json& j, const std::string& path, FrequencyGrid& out);
void read_json(const Json& j, const std::string& path, Box3& out);
void read_json(const Json& j, const std::string& path, HashGridConfig& out);
void read_json(const Json& j, const std::string& path, FieldConfig& out);
void read_json(const Json& j, const std::string& path, RenderConfig& out);
void read_json(const Json& j, const std::string& path, Medium& out);
void read_json(const Json& j, const std::string& path, ShoeboxScene& out);
void read_json(const Json& j, const std::string& path, DatasetSpec& out);
void read_json(const Json& j, const std::string& path, LossSettings& out);
void read_json(const Json& j, const std::string& path, TrainConfig& out);
void read_json(const Json& j, const std::string& path, SceneQuery& out);

// The whole run description. JSON sections: scene, dataset, encoding, field,
// render, train, loss. field.n_bins always follows dataset.grid.
struct RunConfig {
  ShoeboxScene scene;
  DatasetSpec dataset;
  FieldConfig field;
  RenderConfig render;
  TrainConfig train;

  static RunConfig preset(const std::string& name);  // "desk" or "full"
  // Derived fields (n_bins, encoding bounds default, speed of sound).
  void finalize();
  void validate() const;
};

Json to_json(const RunConfig& config);
// Applies `j` on top of `base`. Diagnostics carry the key path and, when
// `text` is the document source, its line number.
RunConfig parse_run_config(const std::string& text, RunConfig base,
                           const std::string& source_name = "config");
RunConfig load_run_config(const std::filesystem::path& path, RunConfig base);

// Canonical serialization: ordered keys, two-space indent, trailing newline.
std::string dump_canonical(const Json& j);

}  // namespace freqfield
