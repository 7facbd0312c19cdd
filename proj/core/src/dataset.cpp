// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#include <cmath>
#include <fstream>
#include <string>

#include "binary_io.hpp"
#include "freqfield/config_io.hpp"
#include "freqfield/error.hpp"
#include "freqfield/oracle.hpp"

namespace freqfield {

namespace detail {

std::vector<unsigned char> read_file(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw DataError(path.string() + ": cannot open for reading");
  std::vector<unsigned char> bytes((std::istreambuf_iterator<char>(in)),
                                   std::istreambuf_iterator<char>());
  if (in.bad()) throw DataError(path.string() + ": read failed");
  return bytes;
}

void write_file(const std::filesystem::path& path, std::span<const unsigned char> bytes) {
  std::ofstream out(path, std::ios::binary | std::ios::trunc);
  if (!out) throw DataError(path.string() + ": cannot open for writing");
  out.write(reinterpret_cast<const char*>(bytes.data()),
            static_cast<std::streamsize>(bytes.size()));
  if (!out) throw DataError(path.string() + ": write failed");
}

void write_text(const std::filesystem::path& path, const std::string& text) {
  write_file(path, std::span(reinterpret_cast<const unsigned char*>(text.data()), text.size()));
}

}  // namespace detail

namespace {

constexpr const char* kManifest = "manifest.json";
constexpr const char* kSpectra = "spectra.bin";
constexpr const char* kQueries = "queries.bin";
constexpr std::size_t kQueryFloats = 12;

}  // namespace

void write_dataset(const OracleDataset& ds, const std::filesystem::path& dir) {
  if (ds.spectra.size() != ds.queries.size())
    throw InvalidInput("write_dataset: spectra and queries differ in count");
  std::error_code ec;
  std::filesystem::create_directories(dir, ec);
  if (ec) throw DataError(dir.string() + ": cannot create directory: " + ec.message());

  Json manifest;
  manifest["format_version"] = OracleDataset::kFormatVersion;
  manifest["grid"] = to_json(ds.grid);
  manifest["speed_of_sound"] = ds.speed_of_sound;
  manifest["scene"] = to_json(ds.scene);
  manifest["generator"] = to_json(ds.spec);
  manifest["n_receivers"] = ds.size();
  manifest["split"] = {{"train", ds.train}, {"held_out", ds.held_out}};
  manifest["files"] = {{"spectra", kSpectra}, {"queries", kQueries}};

  std::vector<unsigned char> spectra;
  spectra.reserve(ds.size() * ds.grid.n_bins() * 8);
  for (const auto& s : ds.spectra) {
    if (s.grid != ds.grid) throw InvalidInput("write_dataset: spectrum grid mismatch");
    for (const Complex& z : s.values) {
      detail::put_f32(spectra, z.real());
      detail::put_f32(spectra, z.imag());
    }
  }
  std::vector<unsigned char> queries;
  queries.reserve(ds.size() * kQueryFloats * 4);
  for (const auto& q : ds.queries)
    for (const Vec3* v : {&q.p_tx, &q.n_tx, &q.p_rx, &q.rx_orientation})
      for (int i = 0; i < 3; ++i) detail::put_f32(queries, (*v)[i]);

  detail::write_text(dir / kManifest, dump_canonical(manifest));
  detail::write_file(dir / kSpectra, spectra);
  detail::write_file(dir / kQueries, queries);
}

OracleDataset read_dataset(const std::filesystem::path& dir) {
  const auto manifest_path = dir / kManifest;
  const auto raw = detail::read_file(manifest_path);
  Json m;
  try {
    m = Json::parse(raw.begin(), raw.end());
  } catch (const Json::parse_error& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }

  OracleDataset ds;
  std::size_t n = 0;
  try {
    const int version = m.at("format_version").get<int>();
    if (version != OracleDataset::kFormatVersion)
      throw DataError(manifest_path.string() + ": unsupported format_version " +
                      std::to_string(version));
    read_json(m.at("grid"), "grid", ds.grid);
    ds.speed_of_sound = m.at("speed_of_sound").get<double>();
    read_json(m.at("scene"), "scene", ds.scene);
    read_json(m.at("generator"), "generator", ds.spec);
    n = m.at("n_receivers").get<std::size_t>();
    ds.train = m.at("split").at("train").get<std::vector<std::size_t>>();
    ds.held_out = m.at("split").at("held_out").get<std::vector<std::size_t>>();
  } catch (const Json::exception& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  } catch (const ConfigError& e) {
    throw DataError(manifest_path.string() + ": " + e.what());
  }

  std::vector<unsigned char> seen(n, 0);
  for (const auto* list : {&ds.train, &ds.held_out})
    for (std::size_t i : *list) {
      if (i >= n || seen[i]) throw DataError(manifest_path.string() + ": split is not a partition");
      seen[i] = 1;
    }
  for (unsigned char s : seen)
    if (!s) throw DataError(manifest_path.string() + ": split does not cover every receiver");

  const std::size_t nb = ds.grid.n_bins();
  const auto spectra = detail::read_file(dir / kSpectra);
  if (spectra.size() != n * nb * 8)
    throw DataError((dir / kSpectra).string() + ": expected " + std::to_string(n * nb * 8) +
                    " bytes, found " + std::to_string(spectra.size()));
  const auto queries = detail::read_file(dir / kQueries);
  if (queries.size() != n * kQueryFloats * 4)
    throw DataError((dir / kQueries).string() + ": expected " +
                    std::to_string(n * kQueryFloats * 4) + " bytes, found " +
                    std::to_string(queries.size()));

  ds.spectra.reserve(n);
  ds.queries.reserve(n);
  for (std::size_t r = 0; r < n; ++r) {
    ComplexSpectrum s(ds.grid);
    const unsigned char* p = spectra.data() + r * nb * 8;
    for (std::size_t i = 0; i < nb; ++i)
      s.values[i] = Complex(detail::get_f32(p + 8 * i), detail::get_f32(p + 8 * i + 4));
    ds.spectra.push_back(std::move(s));

    const unsigned char* q = queries.data() + r * kQueryFloats * 4;
    SceneQuery query;
    for (Vec3* v : {&query.p_tx, &query.n_tx, &query.p_rx, &query.rx_orientation}) {
      for (int i = 0; i < 3; ++i) (*v)[i] = detail::get_f32(q + 4 * i);
      q += 12;
    }
    // Unit vectors lose exactness in float32; restore unit norm.
    query.n_tx.normalize();
    query.rx_orientation.normalize();
    ds.queries.push_back(query);
  }
  for (const auto& s : ds.spectra)
    for (const Complex& z : s.values)
      if (!std::isfinite(z.real()) || !std::isfinite(z.imag()))
        throw DataError((dir / kSpectra).string() + ": non-finite value");
  return ds;
}

}  // namespace freqfield
