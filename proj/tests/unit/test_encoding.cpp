// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#include <gtest/gtest.h>

#include <random>

#include "freqfield/encoding.hpp"
#include "freqfield/error.hpp"
#include "test_oracles.hpp"

namespace freqfield {
namespace {

HashGridConfig room_config() {
  HashGridConfig c;
  c.bounds = Box3{Vec3(0.0, 0.0, 0.0), Vec3(2.0, 1.5, 1.2)};
  return c;
}

HashGridTables random_tables(const HashGridConfig& c, std::uint64_t seed) {
  HashGridTables t(c);
  std::mt19937_64 rng(seed);
  init_tables(t, 1.0, rng);
  return t;
}

// Vertex (i, j, k) of `level` in meters.
Vec3 vertex_position(const HashGridConfig& c, int level, int i, int j, int k) {
  const double res = c.resolution(level);
  const Vec3 e = c.bounds.extent();
  return c.bounds.lo + Vec3(e.x() * i / res, e.y() * j / res, e.z() * k / res);
}

TEST(HashGridConfig, Defaults) {
  const HashGridConfig c;
  EXPECT_EQ(c.n_levels, 8);
  EXPECT_EQ(c.base_resolution, 4);
  EXPECT_EQ(c.growth_factor, 1.5);
  EXPECT_EQ(c.table_size, 1u << 14);
  EXPECT_EQ(c.feature_dim, 2);
  EXPECT_EQ(c.output_dim(), 16u);
  EXPECT_EQ(c.resolution(0), 4);
  EXPECT_EQ(c.resolution(1), 6);
  EXPECT_EQ(c.resolution(7), 68);  // floor(4 * 1.5^7)
}

TEST(HashGridConfig, Validation) {
  HashGridConfig c = room_config();
  EXPECT_NO_THROW(c.validate());
  c.table_size = 1000;
  EXPECT_THROW(c.validate(), ConfigError);
  c = room_config();
  c.growth_factor = 1.0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = room_config();
  c.n_levels = 0;
  EXPECT_THROW(c.validate(), ConfigError);
  c = room_config();
  c.bounds.hi.x() = c.bounds.lo.x();
  EXPECT_THROW(c.validate(), ConfigError);
}

TEST(Encode, Deterministic) {
  const auto c = room_config();
  const auto t = random_tables(c, 1);
  const Vec3 p(0.31, 1.02, 0.77);
  EXPECT_EQ(encode(p, t, c), encode(p, t, c));
}

TEST(Encode, VertexReturnsStoredRow) {
  const auto c = room_config();
  const auto t = random_tables(c, 2);
  for (int level = 0; level < c.n_levels; ++level) {
    const int res = c.resolution(level);
    for (const auto& ijk :
         {std::array<int, 3>{0, 0, 0}, {1, 2, 3}, {res, res, res}, {res / 2, 1, res - 1}}) {
      const Vec3 p = vertex_position(c, level, ijk[0], ijk[1], ijk[2]);
      const auto out = encode(p, t, c);
      // Direct lookup with the same spatial hash.
      const std::uint32_t slot = ((static_cast<std::uint32_t>(ijk[0]) * 73856093u) ^
                                  (static_cast<std::uint32_t>(ijk[1]) * 19349663u) ^
                                  (static_cast<std::uint32_t>(ijk[2]) * 83492791u)) &
                                 (c.table_size - 1u);
      const auto row = t.row(c, level, slot);
      for (int f = 0; f < c.feature_dim; ++f)
        EXPECT_NEAR(out[static_cast<std::size_t>(level * c.feature_dim + f)], row[f], 1e-12)
            << "level " << level;
    }
  }
}

TEST(Encode, CellCenterIsCornerMean) {
  const auto c = room_config();
  const auto t = random_tables(c, 3);
  const int level = 2;
  const int res = c.resolution(level);
  const Vec3 e = c.bounds.extent();
  const int i = 3, j = 1, k = 4;
  const Vec3 p =
      c.bounds.lo + Vec3(e.x() * (i + 0.5) / res, e.y() * (j + 0.5) / res, e.z() * (k + 0.5) / res);
  const auto out = encode(p, t, c);
  for (int f = 0; f < c.feature_dim; ++f) {
    double mean = 0.0;
    for (int corner = 0; corner < 8; ++corner) {
      const auto slot = hash_vertex(i + (corner & 1), j + ((corner >> 1) & 1),
                                    k + ((corner >> 2) & 1), c.table_size);
      mean += t.row(c, level, slot)[f] / 8.0;
    }
    EXPECT_NEAR(out[static_cast<std::size_t>(level * c.feature_dim + f)], mean, 1e-12);
  }
}

TEST(Encode, OutOfBoundsClamps) {
  const auto c = room_config();
  const auto t = random_tables(c, 4);
  EXPECT_EQ(encode(Vec3(-1.0, 0.7, 0.6), t, c), encode(Vec3(0.0, 0.7, 0.6), t, c));
  EXPECT_EQ(encode(Vec3(5.0, 9.0, 0.6), t, c), encode(Vec3(2.0, 1.5, 0.6), t, c));
}

TEST(Encode, WeightsArePartitionOfUnity) {
  const auto c = room_config();
  std::mt19937_64 rng(5);
  std::uniform_real_distribution<double> u(-0.2, 2.2);
  for (int trial = 0; trial < 200; ++trial) {
    const Vec3 p(u(rng), u(rng), u(rng));
    for (int level = 0; level < c.n_levels; ++level) {
      const auto st = level_stencil(p, level, c);
      double sum = 0.0;
      for (double w : st.weight) {
        EXPECT_GE(w, 0.0);
        sum += w;
      }
      EXPECT_NEAR(sum, 1.0, 1e-12);
    }
  }
}

TEST(Encode, ContinuousAcrossCellFaces) {
  const auto c = room_config();
  const auto t = random_tables(c, 6);
  const int level = 3;
  const Vec3 face = vertex_position(c, level, 5, 0, 0) + Vec3(0.0, 0.37, 0.51);
  const Vec3 nudge(1e-13, 0.0, 0.0);
  const auto left = encode(face - nudge, t, c);
  const auto right = encode(face + nudge, t, c);
  for (std::size_t i = 0; i < left.size(); ++i) EXPECT_NEAR(left[i], right[i], 1e-9);
}

TEST(EncodeBackward, ZeroUpstreamLeavesBuffersUnchanged) {
  const auto c = room_config();
  HashGridTables grad(c);
  grad.values.assign(grad.values.size(), 0.25);
  const std::vector<double> zero(c.output_dim(), 0.0);
  encode_backward(Vec3(0.4, 0.4, 0.4), zero, grad, c);
  for (double v : grad.values) EXPECT_EQ(v, 0.25);
}

TEST(EncodeBackward, VertexTouchesOneRowPerLevel) {
  const auto c = room_config();
  HashGridTables grad(c);
  std::vector<double> up(c.output_dim());
  for (std::size_t i = 0; i < up.size(); ++i) up[i] = 0.5 + static_cast<double>(i);
  encode_backward(c.bounds.lo, up, grad, c);
  const std::uint32_t slot0 = hash_vertex(0, 0, 0, c.table_size);
  std::size_t nonzero = 0;
  for (double v : grad.values) nonzero += v != 0.0;
  EXPECT_EQ(nonzero, c.output_dim());
  for (int level = 0; level < c.n_levels; ++level)
    for (int f = 0; f < c.feature_dim; ++f)
      EXPECT_EQ(grad.row(c, level, slot0)[f],
                up[static_cast<std::size_t>(level * c.feature_dim + f)]);
}

TEST(EncodeBackward, MassPerLevelEqualsUpstream) {
  const auto c = room_config();
  HashGridTables grad(c);
  std::vector<double> up(c.output_dim(), 0.0);
  const int level = 4;
  up[static_cast<std::size_t>(level * c.feature_dim)] = 2.5;
  encode_backward(Vec3(1.234, 0.321, 0.987), up, grad, c);
  double total = 0.0;
  for (double v : grad.values) total += v;
  EXPECT_NEAR(total, 2.5, 1e-12);
}

TEST(EncodeBackward, MatchesFiniteDifferences) {
  const auto c = room_config();
  auto t = random_tables(c, 7);
  std::mt19937_64 rng(8);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  int checked = 0;
  for (int trial = 0; trial < 10; ++trial) {
    const Vec3 p(2.0 * u(rng), 1.5 * u(rng), 1.2 * u(rng));
    const auto up = testing::random_vector(c.output_dim(), rng);
    auto loss = [&] {
      const auto e = encode(p, t, c);
      double s = 0.0;
      for (std::size_t i = 0; i < e.size(); ++i) s += up[i] * e[i];
      return s;
    };
    HashGridTables grad(c);
    encode_backward(p, up, grad, c);
    // Five entries among the touched rows.
    for (int pick = 0; pick < 5; ++pick) {
      const int level = static_cast<int>(rng() % static_cast<std::uint64_t>(c.n_levels));
      const auto st = level_stencil(p, level, c);
      const int corner = static_cast<int>(rng() % 8);
      const int f = static_cast<int>(rng() % static_cast<std::uint64_t>(c.feature_dim));
      double& entry = t.row(c, level, st.slot[corner])[static_cast<std::size_t>(f)];
      const double fd = testing::central_difference(loss, entry, 1e-3);
      const double analytic = grad.row(c, level, st.slot[corner])[static_cast<std::size_t>(f)];
      EXPECT_LE(testing::rel_error(analytic, fd, 1e-9), 1e-4);
      ++checked;
    }
  }
  EXPECT_EQ(checked, 50);
}

TEST(EncodeDirection, Layout) {
  std::vector<double> out(direction_encoding_dim(4));
  encode_direction(Vec3(0.0, 0.6, 0.8), 4, out);
  EXPECT_EQ(out.size(), 24u);
  EXPECT_DOUBLE_EQ(out[0], 0.0);
  EXPECT_DOUBLE_EQ(out[1], 1.0);
  EXPECT_DOUBLE_EQ(out[2], std::sin(std::numbers::pi * 0.6));
  EXPECT_DOUBLE_EQ(out[6 + 5], std::cos(2.0 * std::numbers::pi * 0.8));
  std::vector<double> wrong(5);
  EXPECT_THROW(encode_direction(Vec3::UnitX(), 4, wrong), InvalidInput);
}

}  // namespace
}  // namespace freqfield
