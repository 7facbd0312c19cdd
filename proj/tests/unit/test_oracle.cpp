// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <cmath>
#include <numbers>

#include "freqfield/error.hpp"
#include "freqfield/oracle.hpp"
#include "temp_dir.hpp"

namespace freqfield {
namespace {

constexpr double kPi = std::numbers::pi;

SceneQuery query_at(const Vec3& tx, const Vec3& rx) {
  SceneQuery q;
  q.p_tx = tx;
  q.p_rx = rx;
  return q;
}

Complex green(double r, double f, double v) {
  return std::polar(1.0 / (4.0 * kPi * r), -2.0 * kPi * f * r / v);
}

TEST(FreeField, MagnitudeAndPhase) {
  const FrequencyGrid grid(512, 16000.0);
  const ComplexSpectrum h = free_field(1.0, grid, 343.0);
  for (const Complex& z : h.values) EXPECT_NEAR(std::abs(z), 0.0795775, 1e-7);
  // r = v / f: one full wavelength at bin 10 (312.5 Hz).
  const ComplexSpectrum w = free_field(343.0 / 312.5, grid, 343.0);
  EXPECT_NEAR(std::arg(w.values[10]), 0.0, 1e-12);
  EXPECT_NEAR(w.values[10].imag(), 0.0, 1e-14);
  EXPECT_THROW(free_field(0.0, grid, 343.0), InvalidInput);
  EXPECT_THROW(free_field(-1.0, grid, 343.0), InvalidInput);
}

TEST(FreeField, PhaseSlopeIsLinear) {
  const FrequencyGrid grid(512, 16000.0);
  const double r = 2.37;
  const ComplexSpectrum h = free_field(r, grid, 343.0);
  double unwrapped = 0.0;
  double prev = std::arg(h.values[0]);
  for (std::size_t i = 1; i < grid.n_bins(); ++i) {
    double step = std::arg(h.values[i]) - prev;
    step -= 2.0 * kPi * std::round(step / (2.0 * kPi));
    unwrapped += step;
    prev = std::arg(h.values[i]);
    EXPECT_NEAR(unwrapped, -2.0 * kPi * grid.bin_hz(i) * r / 343.0, 1e-9);
  }
}

TEST(FreeField, TimePeak) {
  const FrequencyGrid grid(4096, 48000.0);
  const ImpulseResponse ir = inverse_ir(free_field(3.43, grid, 343.0));
  const auto peak = std::max_element(ir.samples.begin(), ir.samples.end()) - ir.samples.begin();
  EXPECT_EQ(peak, 480);
}

TEST(KKPair, PowerLaw) {
  const FrequencyGrid grid(512, 16000.0);
  const auto [s0, b0] = kk_pair_power_law(0.0, 0.5, 1000.0, grid);
  for (std::size_t i = 0; i < s0.size(); ++i) {
    EXPECT_EQ(s0[i], 0.0);
    EXPECT_EQ(b0[i], 0.0);
  }
  const auto [s1, b1] = kk_pair_power_law(0.3, 0.5, 1000.0, grid);
  const auto [s2, b2] = kk_pair_power_law(0.6, 0.5, 1000.0, grid);
  for (std::size_t i = 0; i < s1.size(); ++i) {
    EXPECT_NEAR(s1[i], 0.3 * std::pow(grid.bin_hz(i) / 1000.0, 0.5), 1e-15);
    EXPECT_NEAR(s2[i], 2.0 * s1[i], 1e-14);
    EXPECT_NEAR(b2[i], 2.0 * b1[i], 1e-13);
  }
  EXPECT_THROW(kk_pair_power_law(0.3, 1.0, 1000.0, grid), InvalidInput);
  EXPECT_THROW(kk_pair_power_law(0.3, 2.0, 1000.0, grid), InvalidInput);
  EXPECT_THROW(kk_pair_power_law(-0.1, 0.5, 1000.0, grid), InvalidInput);
}

TEST(ImageSources, CountsPerOrder) {
  const Vec3 dims(2.0, 1.5, 1.2);
  const Vec3 src(0.35, 0.5, 0.4);
  EXPECT_EQ(enumerate_images(src, dims, 0).size(), 1u);
  EXPECT_EQ(enumerate_images(src, dims, 1).size(), 7u);
  EXPECT_EQ(enumerate_images(src, dims, 2).size(), 25u);
  EXPECT_EQ(enumerate_images(src, dims, 3).size(), 63u);
  for (const ImageSource& img : enumerate_images(src, dims, 1)) {
    if (img.order() == 0) {
      EXPECT_TRUE(img.position.isApprox(src));
    }
  }
}

TEST(ImageSources, FirstOrderPositions) {
  const Vec3 dims(2.0, 1.5, 1.2);
  const Vec3 s(0.35, 0.5, 0.4);
  std::vector<std::pair<int, Vec3>> want{{0, Vec3(-0.35, 0.5, 0.4)}, {1, Vec3(3.65, 0.5, 0.4)},
                                         {2, Vec3(0.35, -0.5, 0.4)}, {3, Vec3(0.35, 2.5, 0.4)},
                                         {4, Vec3(0.35, 0.5, -0.4)}, {5, Vec3(0.35, 0.5, 2.0)}};
  const auto imgs = enumerate_images(s, dims, 1);
  for (const auto& [wall, pos] : want) {
    int found = 0;
    for (const ImageSource& img : imgs) {
      if (img.order() == 1 && img.wall_hits[static_cast<std::size_t>(wall)] == 1) {
        EXPECT_NEAR((img.position - pos).norm(), 0.0, 1e-12) << wall;
        ++found;
      }
    }
    EXPECT_EQ(found, 1) << wall;
  }
}

TEST(ImageSourceResponse, OrderZeroIsFreeField) {
  ShoeboxScene scene = ShoeboxScene::desk();
  scene.max_image_order = 0;
  const FrequencyGrid grid(512, 16000.0);
  const auto q = query_at(Vec3(0.35, 0.5, 0.4), Vec3(1.4, 1.1, 0.9));
  const ComplexSpectrum h = image_source_response(scene, q, grid, 343.0);
  const ComplexSpectrum ff = free_field((q.p_rx - q.p_tx).norm(), grid, 343.0);
  for (std::size_t i = 0; i < grid.n_bins(); ++i) EXPECT_EQ(h.values[i], ff.values[i]);
}

// Perfectly reflective 2 m cube with the source at the centre: every
// first-order image sits 2 m from the centre. The receiver is offset by d
// along z so the direct path is finite.
TEST(ImageSourceResponse, ReflectiveCubeHandEvaluation) {
  ShoeboxScene scene;
  scene.dimensions = Vec3(2.0, 2.0, 2.0);
  scene.set_reflection(1.0);
  scene.max_image_order = 1;
  const FrequencyGrid grid(256, 8000.0);
  const double d = 0.3;
  const auto q = query_at(Vec3(1.0, 1.0, 1.0), Vec3(1.0, 1.0, 1.0 + d));
  const ComplexSpectrum h = image_source_response(scene, q, grid, 343.0);
  const double side = std::sqrt(4.0 + d * d);
  for (std::size_t i = 0; i < grid.n_bins(); ++i) {
    const double f = grid.bin_hz(i);
    const Complex want = green(d, f, 343.0) + 4.0 * green(side, f, 343.0) +
                         green(2.0 - d, f, 343.0) + green(2.0 + d, f, 343.0);
    EXPECT_NEAR(std::abs(h.values[i] - want), 0.0, 1e-13);
  }
  // Receiver at the centre, source offset: same spectrum by reciprocity.
  const auto centre = query_at(Vec3(1.0, 1.0, 1.0 + d), Vec3(1.0, 1.0, 1.0));
  const ComplexSpectrum hc = image_source_response(scene, centre, grid, 343.0);
  for (std::size_t i = 0; i < grid.n_bins(); ++i)
    EXPECT_NEAR(std::abs(hc.values[i] - h.values[i]), 0.0, 1e-13);
}

TEST(ImageSourceResponse, Reciprocity) {
  ShoeboxScene scene = ShoeboxScene::desk();
  scene.reflection = {{{0.9}, {0.5}, {0.7}, {0.3}, {0.8}, {0.6}}};
  const FrequencyGrid grid(512, 16000.0);
  const Vec3 a(0.35, 0.5, 0.4), b(1.55, 1.2, 0.95);
  const ComplexSpectrum ab = image_source_response(scene, query_at(a, b), grid, 343.0);
  const ComplexSpectrum ba = image_source_response(scene, query_at(b, a), grid, 343.0);
  for (std::size_t i = 0; i < grid.n_bins(); ++i)
    EXPECT_NEAR(std::abs(ab.values[i] - ba.values[i]), 0.0, 1e-9);
}

TEST(ImageSourceResponse, IncoherentEnergyGrowsWithOrder) {
  ShoeboxScene scene = ShoeboxScene::desk();
  scene.reflection = {{{0.9}, {0.5}, {0.7}, {0.3}, {0.8}, {0.6}}};
  const Vec3 src(0.35, 0.5, 0.4), rx(1.3, 0.9, 0.7);
  double prev = 0.0;
  for (int order = 0; order <= 5; ++order) {
    double energy = 0.0;
    for (const ImageSource& img : enumerate_images(src, scene.dimensions, order)) {
      double g = 1.0 / (4.0 * kPi * (img.position - rx).norm());
      for (std::size_t w = 0; w < 6; ++w)
        g *= std::pow(scene.reflection_at(Wall(w), 0), img.wall_hits[w]);
      energy += g * g;
    }
    EXPECT_GT(energy, prev);
    prev = energy;
  }
}

TEST(ImageSourceResponse, PerBinReflectionAndLossyMedium) {
  const FrequencyGrid grid(64, 4000.0);
  ShoeboxScene scene = ShoeboxScene::desk();
  scene.max_image_order = 1;
  scene.set_reflection(0.0);
  std::vector<double> ramp(grid.n_bins());
  for (std::size_t i = 0; i < ramp.size(); ++i) ramp[i] = static_cast<double>(i) / 32.0;
  scene.reflection[static_cast<std::size_t>(Wall::kXMin)] = ramp;
  const Vec3 s(0.35, 0.5, 0.4), r(1.2, 0.9, 0.8);
  const ComplexSpectrum h = image_source_response(scene, query_at(s, r), grid, 343.0);
  const double r_direct = (r - s).norm();
  const double r_img = (r - Vec3(-0.35, 0.5, 0.4)).norm();
  for (std::size_t i = 0; i < grid.n_bins(); ++i) {
    const double f = grid.bin_hz(i);
    EXPECT_NEAR(
        std::abs(h.values[i] - (green(r_direct, f, 343.0) + ramp[i] * green(r_img, f, 343.0))), 0.0,
        1e-14);
  }

  ShoeboxScene lossy = ShoeboxScene::free_field_scene(Vec3(2.0, 1.5, 1.2));
  lossy.medium = Medium{Medium::Kind::kPowerLaw, 0.4, 0.5, 1000.0};
  const ComplexSpectrum hl = image_source_response(lossy, query_at(s, r), grid, 343.0);
  const auto [sig, bet] = kk_pair_power_law(0.4, 0.5, 1000.0, grid);
  for (std::size_t i = 0; i < grid.n_bins(); ++i) {
    const Complex want = green(r_direct, grid.bin_hz(i), 343.0) *
                         std::exp(Complex(-sig[i] * r_direct, bet[i] * r_direct));
    EXPECT_NEAR(std::abs(hl.values[i] - want), 0.0, 1e-14);
  }
}

TEST(ImageSourceResponse, Validation) {
  ShoeboxScene scene = ShoeboxScene::desk();
  const FrequencyGrid grid(64, 4000.0);
  EXPECT_THROW(
      image_source_response(scene, query_at(Vec3(0.0, 0.5, 0.5), Vec3(1, 1, 1)), grid, 343.0),
      InvalidInput);
  EXPECT_THROW(
      image_source_response(scene, query_at(Vec3(0.5, 0.5, 0.5), Vec3(1, 1, 3)), grid, 343.0),
      InvalidInput);
  scene.set_reflection(1.2);
  EXPECT_THROW(scene.validate(33), ConfigError);
  scene = ShoeboxScene::desk();
  scene.reflection[2] = std::vector<double>(10, 0.5);
  EXPECT_THROW(scene.validate(33), ConfigError);
  scene = ShoeboxScene::desk();
  scene.medium = Medium{Medium::Kind::kPowerLaw, 0.1, 1.0, 1000.0};
  EXPECT_THROW(scene.validate(33), ConfigError);
}

TEST(Split, FloorSemanticsAndDeterminism) {
  const auto [train, held] = split_indices(216, 0.8, 0);
  EXPECT_EQ(train.size(), 173u);
  EXPECT_EQ(held.size(), 43u);
  std::vector<int> seen(216, 0);
  for (auto i : train) ++seen[i];
  for (auto i : held) ++seen[i];
  for (int s : seen) EXPECT_EQ(s, 1);
  EXPECT_TRUE(std::is_sorted(train.begin(), train.end()));
  EXPECT_EQ(split_indices(216, 0.8, 0), split_indices(216, 0.8, 0));
  EXPECT_NE(split_indices(216, 0.8, 0).second, split_indices(216, 0.8, 1).second);
  EXPECT_EQ(split_indices(10, 1.0, 3).second.size(), 0u);
  EXPECT_THROW(split_indices(10, 1.5, 3), InvalidInput);
}

TEST(Dataset, DeskDefaults) {
  const OracleDataset ds = generate_dataset(ShoeboxScene::desk(), DatasetSpec{});
  EXPECT_EQ(ds.size(), 216u);
  EXPECT_EQ(ds.train.size(), 173u);
  EXPECT_EQ(ds.held_out.size(), 43u);
  EXPECT_EQ(ds.grid.n_bins(), 257u);
  for (std::size_t i = 0; i < ds.size(); ++i) {
    EXPECT_TRUE(ds.scene.box().strictly_contains(ds.queries[i].p_rx));
    const ComplexSpectrum fresh = image_source_response(ds.scene, ds.queries[i], ds.grid, 343.0);
    for (std::size_t b = 0; b < ds.grid.n_bins(); ++b)
      ASSERT_EQ(ds.spectra[i].values[b], fresh.values[b]);
  }
}

TEST(Dataset, WriteReadAndRegenerate) {
  const OracleDataset ds = generate_dataset(ShoeboxScene::desk(), DatasetSpec{});
  testing::TempDir a("ds_a"), b("ds_b");
  write_dataset(ds, a.path());
  write_dataset(generate_dataset(ShoeboxScene::desk(), DatasetSpec{}), b.path());
  for (const char* f : {"manifest.json", "spectra.bin", "queries.bin"}) {
    EXPECT_EQ(testing::file_bytes(a / f), testing::file_bytes(b / f)) << f;
  }
  EXPECT_EQ(std::filesystem::file_size(a / "spectra.bin"), 216u * 257u * 8u);
  EXPECT_EQ(std::filesystem::file_size(a / "queries.bin"), 216u * 12u * 4u);

  const OracleDataset back = read_dataset(a.path());
  EXPECT_EQ(back.size(), 216u);
  EXPECT_EQ(back.train, ds.train);
  EXPECT_EQ(back.held_out, ds.held_out);
  EXPECT_EQ(back.grid, ds.grid);
  EXPECT_EQ(back.scene, ds.scene);
  // Stored values are the float32 rounding of a fresh evaluation; queries
  // round-trip through float32 too, so regenerate from the originals.
  for (std::size_t i = 0; i < back.size(); ++i) {
    EXPECT_LT((back.queries[i].p_rx - ds.queries[i].p_rx).norm(), 1e-6);
    const ComplexSpectrum fresh =
        image_source_response(back.scene, ds.queries[i], back.grid, 343.0);
    for (std::size_t k = 0; k < back.grid.n_bins(); ++k) {
      ASSERT_EQ(back.spectra[i].values[k].real(), static_cast<float>(fresh.values[k].real()));
      ASSERT_EQ(back.spectra[i].values[k].imag(), static_cast<float>(fresh.values[k].imag()));
    }
  }
}

TEST(Dataset, ReadErrors) {
  testing::TempDir dir("ds_err");
  EXPECT_THROW(read_dataset(dir / "missing"), DataError);
  ShoeboxScene scene = ShoeboxScene::desk();
  DatasetSpec spec;
  spec.receiver_counts = {2, 2, 2};
  write_dataset(generate_dataset(scene, spec), dir.path());
  std::filesystem::resize_file(dir / "spectra.bin", 100);
  EXPECT_THROW(read_dataset(dir.path()), DataError);
  std::ofstream(dir / "manifest.json") << "{ not json";
  EXPECT_THROW(read_dataset(dir.path()), DataError);
}

TEST(Dataset, GenerationErrors) {
  DatasetSpec spec;
  spec.source = Vec3(2.5, 0.5, 0.5);
  EXPECT_THROW(generate_dataset(ShoeboxScene::desk(), spec), ConfigError);
  spec = DatasetSpec{};
  spec.receiver_counts = {0, 2, 2};
  EXPECT_THROW(generate_dataset(ShoeboxScene::desk(), spec), ConfigError);
  spec = DatasetSpec{};
  spec.receiver_counts = {1, 1, 1};
  spec.source = Vec3(1.0, 0.75, 0.6);
  EXPECT_THROW(generate_dataset(ShoeboxScene::desk(), spec), ConfigError);
}

}  // namespace
}  // namespace freqfield
