// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#include <cstring>
#include <sstream>

#include "binary_io.hpp"
#include "freqfield/config_io.hpp"
#include "freqfield/error.hpp"
#include "freqfield/trainer.hpp"

namespace freqfield {

namespace {

constexpr unsigned char kMagic[8] = {'F', 'Q', 'F', 'C', 'K', 'P', 'T', '\0'};
constexpr const char* kGroups[3] = {"params", "adam_m", "adam_v"};

// Shapes in for_each_tensor order.
std::vector<std::vector<std::size_t>> tensor_shapes(const FieldParams& p) {
  const auto& e = p.config.encoding;
  std::vector<std::vector<std::size_t>> out;
  const std::vector<std::size_t> table{static_cast<std::size_t>(e.n_levels), e.table_size,
                                       static_cast<std::size_t>(e.feature_dim)};
  out.push_back(table);
  out.push_back(table);
  for (const Mlp* mlp : {&p.attenuation, &p.emission})
    for (const auto& layer : mlp->layers) {
      out.push_back({static_cast<std::size_t>(layer.weight.rows()),
                     static_cast<std::size_t>(layer.weight.cols())});
      out.push_back({static_cast<std::size_t>(layer.bias.size())});
    }
  out.push_back({1});
  return out;
}

// Parameters with the right shapes for `config`; values are overwritten.
FieldParams blank_params(const FieldConfig& config) {
  Rng scratch(0);
  FieldParams p = FieldParams::initialize(config, scratch);
  p.set_zero();
  return p;
}

}  // namespace

std::vector<unsigned char> serialize_checkpoint(const Checkpoint& c) {
  Json header;
  header["format_version"] = Checkpoint::kFormatVersion;
  header["step"] = c.step;
  std::ostringstream rng;
  rng << c.rng;
  header["rng_state"] = rng.str();
  header["grid"] = to_json(c.grid);
  header["train"] = to_json(c.train);
  header["render"] = to_json(c.render);
  header["field"] = to_json(c.params.config);

  std::vector<unsigned char> payload;
  Json directory = Json::array();
  const auto shapes = tensor_shapes(c.params);
  const FieldParams* groups[3] = {&c.params, &c.adam_m, &c.adam_v};
  for (int g = 0; g < 3; ++g) {
    std::size_t t = 0;
    groups[g]->for_each_tensor([&](const std::string& name, std::span<const double> v) {
      directory.push_back({{"name", std::string(kGroups[g]) + "/" + name},
                           {"offset", payload.size()},
                           {"shape", shapes.at(t++)}});
      for (double x : v) detail::put_f32(payload, x);
    });
  }
  header["tensors"] = directory;
  header["payload_bytes"] = payload.size();

  const std::string text = header.dump();
  std::vector<unsigned char> out(kMagic, kMagic + 8);
  detail::put_u32(out, static_cast<std::uint32_t>(Checkpoint::kFormatVersion));
  detail::put_u64(out, text.size());
  out.insert(out.end(), text.begin(), text.end());
  out.insert(out.end(), payload.begin(), payload.end());
  return out;
}

Checkpoint deserialize_checkpoint(std::span<const unsigned char> bytes) {
  if (bytes.size() < 20 || std::memcmp(bytes.data(), kMagic, 8) != 0)
    throw DataError("not a freqfield checkpoint (bad magic)");
  const std::uint32_t version = detail::get_u32(bytes.data() + 8);
  if (version != Checkpoint::kFormatVersion)
    throw DataError("unsupported checkpoint version " + std::to_string(version));
  const std::uint64_t header_len = detail::get_u64(bytes.data() + 12);
  if (header_len > bytes.size() - 20) throw DataError("truncated checkpoint header");
  const auto* hb = reinterpret_cast<const char*>(bytes.data() + 20);
  const std::span<const unsigned char> payload = bytes.subspan(20 + header_len);

  Checkpoint c;
  try {
    const Json h = Json::parse(hb, hb + header_len);
    c.step = h.at("step").get<std::int64_t>();
    std::istringstream rng(h.at("rng_state").get<std::string>());
    rng >> c.rng;
    if (!rng) throw DataError("corrupt RNG state");
    read_json(h.at("grid"), "grid", c.grid);
    read_json(h.at("train"), "train", c.train);
    read_json(h.at("render"), "render", c.render);
    FieldConfig field;
    read_json(h.at("field"), "field", field);
    field.validate();
    if (h.at("payload_bytes").get<std::size_t>() != payload.size())
      throw DataError("payload size does not match the header");

    c.params = blank_params(field);
    c.adam_m = c.params.zeros_like();
    c.adam_v = c.params.zeros_like();
    const auto shapes = tensor_shapes(c.params);
    const Json& dir = h.at("tensors");
    std::size_t entry = 0;
    FieldParams* groups[3] = {&c.params, &c.adam_m, &c.adam_v};
    for (int g = 0; g < 3; ++g) {
      std::size_t t = 0;
      groups[g]->for_each_tensor([&](const std::string& name, std::span<double> v) {
        if (entry >= dir.size()) throw DataError("tensor directory is short");
        const Json& d = dir[entry++];
        const std::string expect = std::string(kGroups[g]) + "/" + name;
        if (d.at("name").get<std::string>() != expect)
          throw DataError("tensor directory mismatch: expected " + expect);
        if (d.at("shape").get<std::vector<std::size_t>>() != shapes.at(t++))
          throw DataError("shape mismatch for tensor " + expect);
        const auto offset = d.at("offset").get<std::size_t>();
        if (offset > payload.size() || payload.size() - offset < v.size() * 4)
          throw DataError("tensor " + expect + " exceeds the payload");
        for (std::size_t i = 0; i < v.size(); ++i) v[i] = detail::get_f32(&payload[offset + 4 * i]);
      });
    }
    if (entry != dir.size()) throw DataError("tensor directory has extra entries");
  } catch (const Json::exception& e) {
    throw DataError(std::string("corrupt checkpoint header: ") + e.what());
  } catch (const ConfigError& e) {
    throw DataError(std::string("invalid checkpoint configuration: ") + e.what());
  }
  return c;
}

void save_checkpoint(const Checkpoint& c, const std::filesystem::path& path) {
  detail::write_file(path, serialize_checkpoint(c));
}

Checkpoint load_checkpoint(const std::filesystem::path& path) {
  const auto bytes = detail::read_file(path);
  try {
    return deserialize_checkpoint(bytes);
  } catch (const DataError& e) {
    throw DataError(path.string() + ": " + e.what());
  }
}

}  // namespace freqfield
