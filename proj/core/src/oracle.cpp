// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "freqfield/oracle.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <numeric>
#include <sstream>

#include "freqfield/error.hpp"
#include "freqfield/random.hpp"

namespace freqfield {

namespace {

constexpr double kPi = std::numbers::pi;

std::string vec_str(const Vec3& v) {
  std::ostringstream os;
  os << "(" << v.x() << ", " << v.y() << ", " << v.z() << ")";
  return os.str();
}

}  // namespace

ShoeboxScene ShoeboxScene::free_field_scene(const Vec3& dimensions) {
  ShoeboxScene s;
  s.dimensions = dimensions;
  s.set_reflection(0.0);
  s.max_image_order = 0;
  return s;
}

void ShoeboxScene::set_reflection(double r) {
  for (auto& w : reflection) w.assign(1, r);
}

double ShoeboxScene::reflection_at(Wall wall, std::size_t bin) const {
  const auto& r = reflection[static_cast<std::size_t>(wall)];
  return r.size() == 1 ? r[0] : r.at(bin);
}

void ShoeboxScene::validate(std::size_t n_bins) const {
  if (!(dimensions.array() > 0.0).all() || !dimensions.allFinite())
    throw ConfigError("scene.dimensions must be positive, got " + vec_str(dimensions));
  if (max_image_order < 0) throw ConfigError("scene.max_image_order must be >= 0");
  for (std::size_t w = 0; w < reflection.size(); ++w) {
    const auto& r = reflection[w];
    if (r.size() != 1 && r.size() != n_bins)
      throw ConfigError("scene.reflection[" + std::to_string(w) + "] must have 1 or " +
                        std::to_string(n_bins) + " entries, got " + std::to_string(r.size()));
    for (double c : r)
      if (!(c >= 0.0 && c <= 1.0))
        throw ConfigError("scene.reflection[" + std::to_string(w) + "] outside [0, 1]");
  }
  if (medium.kind == Medium::Kind::kPowerLaw) {
    if (!(medium.a0 >= 0.0)) throw ConfigError("scene.medium.a0 must be >= 0");
    if (!(medium.exponent > 0.0 && medium.exponent < 2.0) || medium.exponent == 1.0)
      throw ConfigError("scene.medium.exponent must lie in (0, 2) and differ from 1");
    if (!(medium.reference_hz > 0.0)) throw ConfigError("scene.medium.reference_hz must be > 0");
  }
}

ComplexSpectrum free_field(double r, const FrequencyGrid& grid, double speed_of_sound) {
  if (!(r > 0.0) || !std::isfinite(r)) throw InvalidInput("free_field: distance must be > 0");
  if (!(speed_of_sound > 0.0)) throw InvalidInput("free_field: speed of sound must be > 0");
  ComplexSpectrum out(grid);
  const double amp = 1.0 / (4.0 * kPi * r);
  for (std::size_t i = 0; i < grid.n_bins(); ++i) {
    const double phase = -2.0 * kPi * grid.bin_hz(i) * r / speed_of_sound;
    out.values[i] = std::polar(amp, phase);
  }
  return out;
}

std::pair<std::vector<double>, std::vector<double>> kk_pair_power_law(double a0, double exponent,
                                                                      double reference_hz,
                                                                      const FrequencyGrid& grid,
                                                                      double taper_fraction) {
  if (!(a0 >= 0.0)) throw InvalidInput("kk_pair_power_law: a0 must be >= 0");
  if (!(exponent > 0.0 && exponent < 2.0) || exponent == 1.0)
    throw InvalidInput("kk_pair_power_law: exponent must lie in (0, 2) and differ from 1");
  if (!(reference_hz > 0.0)) throw InvalidInput("kk_pair_power_law: reference_hz must be > 0");

  constexpr std::size_t kUpsample = 4;
  // Same band with 4x denser bins.
  const FrequencyGrid fine(grid.n_fft() * kUpsample, grid.sample_rate());
  std::vector<double> sigma_fine(fine.n_bins());
  for (std::size_t i = 0; i < sigma_fine.size(); ++i)
    sigma_fine[i] = a0 * std::pow(fine.bin_hz(i) / reference_hz, exponent);
  const auto beta_fine = hilbert_kk(sigma_fine, taper_fraction);

  std::vector<double> sigma(grid.n_bins()), beta(grid.n_bins());
  const std::size_t stride = (fine.n_bins() - 1) / (grid.n_bins() - 1);
  for (std::size_t i = 0; i < grid.n_bins(); ++i) {
    sigma[i] = a0 * std::pow(grid.bin_hz(i) / reference_hz, exponent);
    beta[i] = beta_fine[i * stride];
  }
  return {sigma, beta};
}

int ImageSource::order() const { return std::accumulate(wall_hits.begin(), wall_hits.end(), 0); }

std::vector<ImageSource> enumerate_images(const Vec3& source, const Vec3& dimensions,
                                          int max_order) {
  if (max_order < 0) throw InvalidInput("enumerate_images: max_order must be >= 0");
  std::vector<ImageSource> out;
  const int n_max = (max_order + 1) / 2 + 1;
  for (int nx = -n_max; nx <= n_max; ++nx)
    for (int qx = 0; qx <= 1; ++qx)
      for (int ny = -n_max; ny <= n_max; ++ny)
        for (int qy = 0; qy <= 1; ++qy)
          for (int nz = -n_max; nz <= n_max; ++nz)
            for (int qz = 0; qz <= 1; ++qz) {
              const int n[3] = {nx, ny, nz};
              const int q[3] = {qx, qy, qz};
              ImageSource img;
              for (int a = 0; a < 3; ++a) {
                img.position[a] = (1 - 2 * q[a]) * source[a] + 2.0 * n[a] * dimensions[a];
                img.wall_hits[2 * a] = std::abs(n[a] - q[a]);
                img.wall_hits[2 * a + 1] = std::abs(n[a]);
              }
              if (img.order() <= max_order) out.push_back(img);
            }
  return out;
}

ComplexSpectrum image_source_response(const ShoeboxScene& scene, const SceneQuery& query,
                                      const FrequencyGrid& grid, double speed_of_sound) {
  const std::size_t nb = grid.n_bins();
  scene.validate(nb);
  query.validate();
  const Box3 box = scene.box();
  if (!box.strictly_contains(query.p_tx))
    throw InvalidInput("image_source_response: source " + vec_str(query.p_tx) +
                       " not strictly inside the room");
  if (!box.strictly_contains(query.p_rx))
    throw InvalidInput("image_source_response: receiver " + vec_str(query.p_rx) +
                       " not strictly inside the room");

  std::vector<double> sigma, beta;
  const bool lossy = scene.medium.kind == Medium::Kind::kPowerLaw && scene.medium.a0 > 0.0;
  if (lossy)
    std::tie(sigma, beta) =
        kk_pair_power_law(scene.medium.a0, scene.medium.exponent, scene.medium.reference_hz, grid);

  ComplexSpectrum out(grid);
  std::vector<double> gain(nb);
  for (const ImageSource& img :
       enumerate_images(query.p_tx, scene.dimensions, scene.max_image_order)) {
    const double r = (img.position - query.p_rx).norm();
    std::fill(gain.begin(), gain.end(), 1.0);
    for (std::size_t w = 0; w < 6; ++w)
      for (int h = 0; h < img.wall_hits[w]; ++h)
        for (std::size_t i = 0; i < nb; ++i) gain[i] *= scene.reflection_at(Wall(w), i);
    const ComplexSpectrum term = free_field(r, grid, speed_of_sound);
    for (std::size_t i = 0; i < nb; ++i) {
      Complex v = term.values[i] * gain[i];
      if (lossy) v *= std::exp(Complex(-sigma[i] * r, beta[i] * r));
      out.values[i] += v;
    }
  }
  return out;
}

std::pair<std::vector<std::size_t>, std::vector<std::size_t>> split_indices(std::size_t n,
                                                                            double ratio,
                                                                            std::uint64_t seed) {
  if (!(ratio >= 0.0 && ratio <= 1.0)) throw InvalidInput("split ratio must lie in [0, 1]");
  std::vector<std::size_t> order(n);
  std::iota(order.begin(), order.end(), std::size_t{0});
  Rng rng(seed);
  for (std::size_t i = n; i > 1; --i) std::swap(order[i - 1], order[uniform_index(rng, i)]);
  const auto held = static_cast<std::size_t>(std::floor((1.0 - ratio) * static_cast<double>(n)));
  std::vector<std::size_t> train(order.begin(), order.end() - static_cast<std::ptrdiff_t>(held));
  std::vector<std::size_t> held_out(order.end() - static_cast<std::ptrdiff_t>(held), order.end());
  std::sort(train.begin(), train.end());
  std::sort(held_out.begin(), held_out.end());
  return {train, held_out};
}

std::vector<Vec3> receiver_lattice(const ShoeboxScene& scene, const std::array<int, 3>& counts) {
  for (int c : counts)
    if (c <= 0) throw ConfigError("receiver counts must be positive");
  std::vector<Vec3> out;
  out.reserve(static_cast<std::size_t>(counts[0]) * counts[1] * counts[2]);
  for (int i = 0; i < counts[0]; ++i)
    for (int j = 0; j < counts[1]; ++j)
      for (int k = 0; k < counts[2]; ++k)
        out.emplace_back((i + 0.5) * scene.dimensions.x() / counts[0],
                         (j + 0.5) * scene.dimensions.y() / counts[1],
                         (k + 0.5) * scene.dimensions.z() / counts[2]);
  return out;
}

OracleDataset generate_dataset(const ShoeboxScene& scene, const DatasetSpec& spec) {
  scene.validate(spec.grid.n_bins());
  if (!(spec.speed_of_sound > 0.0)) throw ConfigError("dataset.speed_of_sound must be > 0");
  if (!is_unit(spec.source_orientation) || !is_unit(spec.receiver_orientation))
    throw ConfigError("dataset orientations must be unit vectors");
  if (!scene.box().strictly_contains(spec.source))
    throw ConfigError("dataset.source " + vec_str(spec.source) + " not strictly inside the room");
  if (!(spec.split_ratio >= 0.0 && spec.split_ratio <= 1.0))
    throw ConfigError("dataset.split_ratio must lie in [0, 1]");

  OracleDataset ds;
  ds.grid = spec.grid;
  ds.speed_of_sound = spec.speed_of_sound;
  ds.scene = scene;
  ds.spec = spec;
  for (const Vec3& p : receiver_lattice(scene, spec.receiver_counts)) {
    if ((p - spec.source).norm() < 1e-9) throw ConfigError("a receiver coincides with the source");
    SceneQuery q{spec.source, spec.source_orientation, p, spec.receiver_orientation};
    ds.spectra.push_back(image_source_response(scene, q, spec.grid, spec.speed_of_sound));
    ds.queries.push_back(q);
  }
  std::tie(ds.train, ds.held_out) = split_indices(ds.size(), spec.split_ratio, spec.seed);
  return ds;
}

}  // namespace freqfield
