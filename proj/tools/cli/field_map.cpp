// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "field_map.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <cstdio>
#include <numbers>

#include "freqfield/error.hpp"
#include "io_util.hpp"

namespace freqfield::cli {

PlaneSpec PlaneSpec::parse(const std::string& text, int n_u, int n_v) {
  const auto eq = text.find('=');
  if (eq != 1 || text.size() < 3 || (text[0] != 'x' && text[0] != 'y' && text[0] != 'z'))
    throw ConfigError("plane '" + text + "': expected <axis>=<metres>, e.g. z=0.6");
  PlaneSpec p;
  p.axis = text[0] - 'x';
  const char* first = text.data() + 2;
  const char* last = text.data() + text.size();
  const auto [ptr, ec] = std::from_chars(first, last, p.offset);
  if (ec != std::errc() || ptr != last) throw ConfigError("plane '" + text + "': bad offset");
  if (n_u < 1 || n_v < 1) throw ConfigError("plane resolution must be positive");
  p.n_u = n_u;
  p.n_v = n_v;
  return p;
}

std::vector<Vec3> plane_points(const PlaneSpec& plane, const ShoeboxScene& scene) {
  const Vec3& dims = scene.dimensions;
  if (!(plane.offset > 0.0 && plane.offset < dims[plane.axis])) {
    const char axis = static_cast<char>('x' + plane.axis);
    throw ConfigError(std::string("plane ") + axis + "=" + std::to_string(plane.offset) +
                      " lies outside the room (0, " + std::to_string(dims[plane.axis]) + ")");
  }
  const int ua = plane.u_axis(), va = plane.v_axis();
  std::vector<Vec3> pts;
  pts.reserve(static_cast<std::size_t>(plane.n_u) * static_cast<std::size_t>(plane.n_v));
  for (int j = 0; j < plane.n_v; ++j)
    for (int i = 0; i < plane.n_u; ++i) {
      Vec3 p;
      p[plane.axis] = plane.offset;
      p[ua] = (i + 0.5) * dims[ua] / plane.n_u;
      p[va] = (j + 0.5) * dims[va] / plane.n_v;
      pts.push_back(p);
    }
  return pts;
}

std::size_t frequency_bin(const FrequencyGrid& grid, double freq_hz) {
  const double nyquist = grid.sample_rate() / 2.0;
  if (!(freq_hz >= 0.0 && freq_hz <= nyquist))
    throw ConfigError("frequency " + std::to_string(freq_hz) + " Hz is outside [0, " +
                      std::to_string(nyquist) + "] Hz");
  const double df = grid.sample_rate() / static_cast<double>(grid.n_fft());
  return std::min(static_cast<std::size_t>(std::lround(freq_hz / df)), grid.n_bins() - 1);
}

namespace {

FieldMap blank_map(const PlaneSpec& plane, const ShoeboxScene& scene, const FrequencyGrid& grid,
                   double freq_hz) {
  FieldMap m;
  m.plane = plane;
  m.bin = frequency_bin(grid, freq_hz);
  m.bin_hz = grid.bin_hz(m.bin);
  m.points = plane_points(plane, scene);
  m.values.reserve(m.points.size());
  return m;
}

}  // namespace

FieldMap ground_truth_map(const ShoeboxScene& scene, const SceneQuery& source,
                          const FrequencyGrid& grid, double speed_of_sound, const PlaneSpec& plane,
                          double freq_hz) {
  FieldMap m = blank_map(plane, scene, grid, freq_hz);
  SceneQuery q = source;
  for (const Vec3& p : m.points) {
    q.p_rx = p;
    m.values.push_back(image_source_response(scene, q, grid, speed_of_sound).values[m.bin]);
  }
  return m;
}

FieldMap model_map(const Checkpoint& ckpt, const ShoeboxScene& scene, const SceneQuery& source,
                   const PlaneSpec& plane, double freq_hz) {
  FieldMap m = blank_map(plane, scene, ckpt.grid, freq_hz);
  SceneQuery q = source;
  for (const Vec3& p : m.points) {
    q.p_rx = p;
    m.values.push_back(render_receiver(q, ckpt.params, ckpt.render, ckpt.grid).values[m.bin]);
  }
  return m;
}

std::string encode_pgm(int width, int height, const std::vector<unsigned char>& pixels) {
  std::string out = "P5\n" + std::to_string(width) + " " + std::to_string(height) + "\n255\n";
  out.append(pixels.begin(), pixels.end());
  return out;
}

void write_field_map(const FieldMap& map, const std::filesystem::path& dir) {
  const std::size_t n = map.values.size();
  std::vector<double> db(n);
  for (std::size_t i = 0; i < n; ++i) db[i] = 20.0 * std::log10(std::abs(map.values[i]) + 1e-12);
  const auto [lo, hi] = std::minmax_element(db.begin(), db.end());
  const double span = *hi - *lo;
  std::vector<unsigned char> mag(n), phase(n);
  for (std::size_t i = 0; i < n; ++i) {
    mag[i] = span > 0.0 ? static_cast<unsigned char>(std::lround(255.0 * (db[i] - *lo) / span)) : 0;
    const double a = std::arg(map.values[i]);
    phase[i] = static_cast<unsigned char>(
        std::lround(255.0 * (a + std::numbers::pi) / (2.0 * std::numbers::pi)));
  }
  std::filesystem::create_directories(dir);
  write_text_file(dir / "magnitude.pgm", encode_pgm(map.plane.n_u, map.plane.n_v, mag));
  write_text_file(dir / "phase.pgm", encode_pgm(map.plane.n_u, map.plane.n_v, phase));

  const int ua = map.plane.u_axis(), va = map.plane.v_axis();
  std::string csv;
  csv += std::string(1, static_cast<char>('x' + ua)) + "," +
         std::string(1, static_cast<char>('x' + va)) + ",re,im\n";
  char line[128];
  for (std::size_t i = 0; i < n; ++i) {
    std::snprintf(line, sizeof line, "%.17g,%.17g,%.17g,%.17g\n", map.points[i][ua],
                  map.points[i][va], map.values[i].real(), map.values[i].imag());
    csv += line;
  }
  write_text_file(dir / "field_map.csv", csv);
}

}  // namespace freqfield::cli
