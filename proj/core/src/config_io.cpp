// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "freqfield/config_io.hpp"

#include <algorithm>
#include <fstream>
#include <limits>
#include <set>
#include <sstream>

#include "freqfield/error.hpp"

namespace freqfield {

namespace {

// Carries the offending key path so callers holding the source text can add
// a line number.
class KeyError : public ConfigError {
 public:
  KeyError(std::string path, const std::string& what)
      : ConfigError(path + ": " + what), path_(std::move(path)) {}
  [[nodiscard]] const std::string& path() const { return path_; }

 private:
  std::string path_;
};

std::string join(const std::string& path, const std::string& key) {
  return path.empty() ? key : path + "." + key;
}

void assign(const Json& j, const std::string& path, double& out) {
  if (!j.is_number()) throw KeyError(path, "expected a number");
  out = j.get<double>();
}

template <class Int>
  requires std::is_integral_v<Int>
void assign(const Json& j, const std::string& path, Int& out) {
  if constexpr (std::is_same_v<Int, bool>) {
    if (!j.is_boolean()) throw KeyError(path, "expected true or false");
    out = j.get<bool>();
  } else {
    if (!j.is_number_integer()) throw KeyError(path, "expected an integer");
    if (j.is_number_unsigned()) {
      const auto v = j.get<std::uint64_t>();
      if (v > static_cast<std::uint64_t>(std::numeric_limits<Int>::max()))
        throw KeyError(path, "integer out of range");
      out = static_cast<Int>(v);
    } else {
      const auto v = j.get<std::int64_t>();
      if constexpr (std::is_unsigned_v<Int>) {
        if (v < 0) throw KeyError(path, "expected a non-negative integer");
        if (static_cast<std::uint64_t>(v) > std::numeric_limits<Int>::max())
          throw KeyError(path, "integer out of range");
      } else {
        if (v < std::numeric_limits<Int>::min() || v > std::numeric_limits<Int>::max())
          throw KeyError(path, "integer out of range");
      }
      out = static_cast<Int>(v);
    }
  }
}

void assign(const Json& j, const std::string& path, std::string& out) {
  if (!j.is_string()) throw KeyError(path, "expected a string");
  out = j.get<std::string>();
}

void assign(const Json& j, const std::string& path, Vec3& out) {
  if (!j.is_array() || j.size() != 3) throw KeyError(path, "expected an array of 3 numbers");
  for (int i = 0; i < 3; ++i) assign(j[static_cast<std::size_t>(i)], path, out[i]);
}

void assign(const Json& j, const std::string& path, std::array<int, 3>& out) {
  if (!j.is_array() || j.size() != 3) throw KeyError(path, "expected an array of 3 integers");
  for (std::size_t i = 0; i < 3; ++i) assign(j[i], path, out[i]);
}

void assign(const Json& j, const std::string& path, std::vector<double>& out) {
  if (j.is_number()) {
    out.assign(1, j.get<double>());
    return;
  }
  if (!j.is_array() || j.empty()) throw KeyError(path, "expected a number or array of numbers");
  out.resize(j.size());
  for (std::size_t i = 0; i < j.size(); ++i) assign(j[i], path, out[i]);
}

template <class T>
  requires requires(const Json& j, const std::string& p, T& t) { read_json(j, p, t); }
void assign(const Json& j, const std::string& path, T& out) {
  read_json(j, path, out);
}

class Reader {
 public:
  Reader(const Json& j, std::string path) : j_(j), path_(std::move(path)) {
    if (!j_.is_object()) throw KeyError(path_.empty() ? "<root>" : path_, "expected an object");
  }

  template <class T>
  Reader& opt(const std::string& key, T& out) {
    seen_.insert(key);
    if (auto it = j_.find(key); it != j_.end()) assign(*it, join(path_, key), out);
    return *this;
  }

  [[nodiscard]] bool has(const std::string& key) const { return j_.contains(key); }
  [[nodiscard]] const Json& at(const std::string& key) const { return j_.at(key); }
  [[nodiscard]] std::string sub(const std::string& key) const { return join(path_, key); }
  void mark(const std::string& key) { seen_.insert(key); }

  void done() const {
    for (auto it = j_.begin(); it != j_.end(); ++it)
      if (!seen_.count(it.key())) throw KeyError(join(path_, it.key()), "unknown key");
  }

 private:
  const Json& j_;
  std::string path_;
  std::set<std::string> seen_;
};

Json vec_json(const Vec3& v) { return Json::array({v.x(), v.y(), v.z()}); }

constexpr const char* kWallNames[6] = {"x_min", "x_max", "y_min", "y_max", "z_min", "z_max"};

std::string directivity_name(Directivity d) {
  return d == Directivity::kCardioid ? "cardioid" : "omni";
}

// 1-based line of the key path's last component, searching the components
// in order; 0 when not found.
std::size_t locate_line(const std::string& text, const std::string& path) {
  std::size_t pos = 0;
  bool found = false;
  std::istringstream parts(path);
  std::string comp;
  while (std::getline(parts, comp, '.')) {
    const std::size_t at = text.find("\"" + comp + "\"", pos);
    if (at == std::string::npos) break;
    pos = at;
    found = true;
  }
  if (!found) return 0;
  return 1 + static_cast<std::size_t>(
                 std::count(text.begin(), text.begin() + static_cast<std::ptrdiff_t>(pos), '\n'));
}

Json train_json(const TrainConfig& c, bool with_loss) {
  Json j;
  j["learning_rate"] = c.adam.learning_rate;
  j["beta1"] = c.adam.beta1;
  j["beta2"] = c.adam.beta2;
  j["epsilon"] = c.adam.epsilon;
  j["batch_size"] = c.batch_size;
  j["n_steps"] = c.n_steps;
  j["seed"] = c.seed;
  j["checkpoint_every"] = c.checkpoint_every;
  j["grad_clip_norm"] = c.grad_clip_norm;
  j["kk_points"] = c.kk_points;
  if (with_loss) j["loss"] = to_json(c.loss);
  return j;
}

void read_train(const Json& j, const std::string& path, TrainConfig& c, bool allow_loss) {
  Reader r(j, path);
  r.opt("learning_rate", c.adam.learning_rate)
      .opt("beta1", c.adam.beta1)
      .opt("beta2", c.adam.beta2)
      .opt("epsilon", c.adam.epsilon)
      .opt("batch_size", c.batch_size)
      .opt("n_steps", c.n_steps)
      .opt("seed", c.seed)
      .opt("checkpoint_every", c.checkpoint_every)
      .opt("grad_clip_norm", c.grad_clip_norm)
      .opt("kk_points", c.kk_points);
  if (allow_loss) r.opt("loss", c.loss);
  r.done();
}

}  // namespace

Json to_json(const FrequencyGrid& grid) {
  Json j;
  j["n_fft"] = grid.n_fft();
  j["sample_rate"] = grid.sample_rate();
  return j;
}

void read_json(const Json& j, const std::string& path, FrequencyGrid& out) {
  std::size_t n_fft = out.n_fft();
  double sr = out.sample_rate();
  Reader(j, path).opt("n_fft", n_fft).opt("sample_rate", sr).done();
  try {
    out = FrequencyGrid(n_fft, sr);
  } catch (const InvalidInput& e) {
    throw KeyError(path, e.what());
  }
}

Json to_json(const Box3& box) {
  Json j;
  j["lo"] = vec_json(box.lo);
  j["hi"] = vec_json(box.hi);
  return j;
}

void read_json(const Json& j, const std::string& path, Box3& out) {
  Reader(j, path).opt("lo", out.lo).opt("hi", out.hi).done();
}

Json to_json(const HashGridConfig& c) {
  Json j;
  j["n_levels"] = c.n_levels;
  j["base_resolution"] = c.base_resolution;
  j["growth_factor"] = c.growth_factor;
  j["table_size"] = c.table_size;
  j["feature_dim"] = c.feature_dim;
  j["bounds"] = to_json(c.bounds);
  return j;
}

void read_json(const Json& j, const std::string& path, HashGridConfig& c) {
  Reader(j, path)
      .opt("n_levels", c.n_levels)
      .opt("base_resolution", c.base_resolution)
      .opt("growth_factor", c.growth_factor)
      .opt("table_size", c.table_size)
      .opt("feature_dim", c.feature_dim)
      .opt("bounds", c.bounds)
      .done();
}

Json to_json(const FieldConfig& c) {
  Json j;
  j["encoding"] = to_json(c.encoding);
  j["n_bins"] = c.n_bins;
  j["hidden_width"] = c.hidden_width;
  j["hidden_layers"] = c.hidden_layers;
  j["feature_width"] = c.feature_width;
  j["direction_frequencies"] = c.direction_frequencies;
  j["sigma_bias"] = c.sigma_bias;
  j["table_init"] = c.table_init;
  return j;
}

void read_json(const Json& j, const std::string& path, FieldConfig& c) {
  Reader(j, path)
      .opt("encoding", c.encoding)
      .opt("n_bins", c.n_bins)
      .opt("hidden_width", c.hidden_width)
      .opt("hidden_layers", c.hidden_layers)
      .opt("feature_width", c.feature_width)
      .opt("direction_frequencies", c.direction_frequencies)
      .opt("sigma_bias", c.sigma_bias)
      .opt("table_init", c.table_init)
      .done();
}

Json to_json(const RenderConfig& c) {
  Json j;
  j["n_samples"] = c.n_samples;
  j["n_azimuth"] = c.n_azimuth;
  j["n_elevation"] = c.n_elevation;
  j["t_near"] = c.t_near;
  j["t_far"] = c.t_far;
  j["speed_of_sound"] = c.speed_of_sound;
  j["directivity"] = directivity_name(c.directivity);
  j["cardioid_axis"] = c.cardioid_axis ? vec_json(*c.cardioid_axis) : Json(nullptr);
  j["jitter"] = c.jitter;
  return j;
}

void read_json(const Json& j, const std::string& path, RenderConfig& c) {
  Reader r(j, path);
  std::string directivity = directivity_name(c.directivity);
  r.opt("n_samples", c.n_samples)
      .opt("n_azimuth", c.n_azimuth)
      .opt("n_elevation", c.n_elevation)
      .opt("t_near", c.t_near)
      .opt("t_far", c.t_far)
      .opt("speed_of_sound", c.speed_of_sound)
      .opt("directivity", directivity)
      .opt("jitter", c.jitter);
  if (directivity == "omni") {
    c.directivity = Directivity::kOmni;
  } else if (directivity == "cardioid") {
    c.directivity = Directivity::kCardioid;
  } else {
    throw KeyError(r.sub("directivity"), "expected \"omni\" or \"cardioid\"");
  }
  r.mark("cardioid_axis");
  if (r.has("cardioid_axis")) {
    if (r.at("cardioid_axis").is_null()) {
      c.cardioid_axis.reset();
    } else {
      Vec3 axis;
      assign(r.at("cardioid_axis"), r.sub("cardioid_axis"), axis);
      c.cardioid_axis = axis;
    }
  }
  r.done();
}

Json to_json(const Medium& m) {
  Json j;
  j["kind"] = m.kind == Medium::Kind::kPowerLaw ? "power_law" : "lossless";
  j["a0"] = m.a0;
  j["exponent"] = m.exponent;
  j["reference_hz"] = m.reference_hz;
  return j;
}

void read_json(const Json& j, const std::string& path, Medium& m) {
  std::string kind = m.kind == Medium::Kind::kPowerLaw ? "power_law" : "lossless";
  Reader(j, path)
      .opt("kind", kind)
      .opt("a0", m.a0)
      .opt("exponent", m.exponent)
      .opt("reference_hz", m.reference_hz)
      .done();
  if (kind == "lossless") {
    m.kind = Medium::Kind::kLossless;
  } else if (kind == "power_law") {
    m.kind = Medium::Kind::kPowerLaw;
  } else {
    throw KeyError(join(path, "kind"), "expected \"lossless\" or \"power_law\"");
  }
}

Json to_json(const ShoeboxScene& s) {
  Json j;
  j["dimensions"] = vec_json(s.dimensions);
  Json refl;
  for (std::size_t w = 0; w < 6; ++w)
    refl[kWallNames[w]] =
        s.reflection[w].size() == 1 ? Json(s.reflection[w][0]) : Json(s.reflection[w]);
  j["reflection"] = refl;
  j["max_image_order"] = s.max_image_order;
  j["medium"] = to_json(s.medium);
  return j;
}

void read_json(const Json& j, const std::string& path, ShoeboxScene& s) {
  Reader r(j, path);
  r.opt("dimensions", s.dimensions)
      .opt("max_image_order", s.max_image_order)
      .opt("medium", s.medium);
  r.mark("reflection");
  if (r.has("reflection")) {
    const Json& refl = r.at("reflection");
    const std::string rp = r.sub("reflection");
    if (refl.is_number()) {
      s.set_reflection(refl.get<double>());
    } else {
      Reader rr(refl, rp);
      for (std::size_t w = 0; w < 6; ++w) rr.opt(kWallNames[w], s.reflection[w]);
      rr.done();
    }
  }
  r.done();
}

Json to_json(const DatasetSpec& d) {
  Json j;
  j["grid"] = to_json(d.grid);
  j["speed_of_sound"] = d.speed_of_sound;
  j["source"] = vec_json(d.source);
  j["source_orientation"] = vec_json(d.source_orientation);
  j["receiver_orientation"] = vec_json(d.receiver_orientation);
  j["receiver_counts"] = d.receiver_counts;
  j["split_ratio"] = d.split_ratio;
  j["seed"] = d.seed;
  return j;
}

void read_json(const Json& j, const std::string& path, DatasetSpec& d) {
  Reader(j, path)
      .opt("grid", d.grid)
      .opt("speed_of_sound", d.speed_of_sound)
      .opt("source", d.source)
      .opt("source_orientation", d.source_orientation)
      .opt("receiver_orientation", d.receiver_orientation)
      .opt("receiver_counts", d.receiver_counts)
      .opt("split_ratio", d.split_ratio)
      .opt("seed", d.seed)
      .done();
}

Json to_json(const LossSettings& l) {
  Json j;
  j["profile"] = l.profile.to_string();
  j["lambda_spec"] = l.lambda_spec;
  j["lambda_mag"] = l.lambda_mag;
  j["lambda_phase"] = l.lambda_phase;
  j["lambda_env"] = l.lambda_env;
  j["lambda_kk"] = l.lambda_kk;
  j["env_alpha"] = l.env_alpha;
  j["env_epsilon"] = l.env_epsilon;
  j["kk_taper_fraction"] = l.kk_taper_fraction;
  return j;
}

void read_json(const Json& j, const std::string& path, LossSettings& l) {
  std::string profile = l.profile.to_string();
  Reader(j, path)
      .opt("profile", profile)
      .opt("lambda_spec", l.lambda_spec)
      .opt("lambda_mag", l.lambda_mag)
      .opt("lambda_phase", l.lambda_phase)
      .opt("lambda_env", l.lambda_env)
      .opt("lambda_kk", l.lambda_kk)
      .opt("env_alpha", l.env_alpha)
      .opt("env_epsilon", l.env_epsilon)
      .opt("kk_taper_fraction", l.kk_taper_fraction)
      .done();
  try {
    l.profile = WeightProfile::parse(profile);
  } catch (const InvalidInput& e) {
    throw KeyError(join(path, "profile"), e.what());
  }
}

Json to_json(const TrainConfig& c) { return train_json(c, true); }

void read_json(const Json& j, const std::string& path, TrainConfig& c) {
  read_train(j, path, c, true);
}

Json to_json(const SceneQuery& q) {
  Json j;
  j["p_tx"] = vec_json(q.p_tx);
  j["n_tx"] = vec_json(q.n_tx);
  j["p_rx"] = vec_json(q.p_rx);
  j["rx_orientation"] = vec_json(q.rx_orientation);
  return j;
}

void read_json(const Json& j, const std::string& path, SceneQuery& q) {
  Reader(j, path)
      .opt("p_tx", q.p_tx)
      .opt("n_tx", q.n_tx)
      .opt("p_rx", q.p_rx)
      .opt("rx_orientation", q.rx_orientation)
      .done();
}

RunConfig RunConfig::preset(const std::string& name) {
  RunConfig c;
  if (name == "desk") {
    c.render = RenderConfig::desk();
  } else if (name == "full") {
    c.render = RenderConfig::full();
  } else {
    throw ConfigError("unknown preset '" + name + "' (expected desk or full)");
  }
  c.field.encoding.bounds = c.scene.box();
  c.finalize();
  return c;
}

void RunConfig::finalize() {
  field.n_bins = dataset.grid.n_bins();
  render.speed_of_sound = dataset.speed_of_sound;
}

void RunConfig::validate() const {
  scene.validate(dataset.grid.n_bins());
  field.validate();
  render.validate();
  train.validate();
  if (!scene.box().strictly_contains(dataset.source))
    throw ConfigError("dataset.source must lie strictly inside the room");
  if (!is_unit(dataset.source_orientation) || !is_unit(dataset.receiver_orientation))
    throw ConfigError("dataset orientations must be unit vectors");
  if (!(dataset.split_ratio >= 0.0 && dataset.split_ratio <= 1.0))
    throw ConfigError("dataset.split_ratio must lie in [0, 1]");
  for (int n : dataset.receiver_counts)
    if (n < 1) throw ConfigError("dataset.receiver_counts must be positive");
}

Json to_json(const RunConfig& c) {
  Json j;
  j["scene"] = to_json(c.scene);
  j["dataset"] = to_json(c.dataset);
  j["encoding"] = to_json(c.field.encoding);
  Json field = to_json(c.field);
  field.erase("encoding");
  field.erase("n_bins");
  j["field"] = field;
  Json render = to_json(c.render);
  render.erase("speed_of_sound");
  j["render"] = render;
  j["train"] = train_json(c.train, false);
  j["loss"] = to_json(c.train.loss);
  return j;
}

RunConfig parse_run_config(const std::string& text, RunConfig base,
                           const std::string& source_name) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::parse_error& e) {
    throw ConfigError(source_name + ": " + e.what());
  }
  try {
    Reader r(j, "");
    r.opt("scene", base.scene).opt("dataset", base.dataset).opt("encoding", base.field.encoding);
    r.mark("field");
    if (r.has("field")) {
      const Json& f = r.at("field");
      Reader(f, "field")
          .opt("hidden_width", base.field.hidden_width)
          .opt("hidden_layers", base.field.hidden_layers)
          .opt("feature_width", base.field.feature_width)
          .opt("direction_frequencies", base.field.direction_frequencies)
          .opt("sigma_bias", base.field.sigma_bias)
          .opt("table_init", base.field.table_init)
          .done();
    }
    r.mark("render");
    if (r.has("render")) {
      if (r.at("render").contains("speed_of_sound"))
        throw KeyError("render.speed_of_sound", "unknown key (set dataset.speed_of_sound)");
      read_json(r.at("render"), "render", base.render);
    }
    r.mark("train");
    if (r.has("train")) read_train(r.at("train"), "train", base.train, false);
    r.opt("loss", base.train.loss);
    r.done();
    // A scene given without explicit encoding bounds carries its box along.
    if (r.has("scene") && !(r.has("encoding") && r.at("encoding").contains("bounds")))
      base.field.encoding.bounds = base.scene.box();
  } catch (const KeyError& e) {
    const std::size_t line = locate_line(text, e.path());
    throw ConfigError(source_name + (line ? ":" + std::to_string(line) : std::string()) + ": " +
                      e.what());
  }
  base.finalize();
  base.validate();
  return base;
}

RunConfig load_run_config(const std::filesystem::path& path, RunConfig base) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError(path.string() + ": cannot open config file");
  std::ostringstream ss;
  ss << in.rdbuf();
  return parse_run_config(ss.str(), std::move(base), path.string());
}

std::string dump_canonical(const Json& j) { return j.dump(2) + "\n"; }

}  // namespace freqfield
