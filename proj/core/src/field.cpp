// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "freqfield/field.hpp"

#include <cmath>

#include "freqfield/error.hpp"

namespace freqfield {

void SceneQuery::validate() const {
  if (!is_unit(n_tx)) throw InvalidInput("SceneQuery: n_tx must be unit-norm");
  if (!is_unit(rx_orientation)) throw InvalidInput("SceneQuery: rx_orientation must be unit-norm");
  if (!p_tx.allFinite() || !p_rx.allFinite()) throw InvalidInput("SceneQuery: non-finite position");
}

void FieldConfig::validate() const {
  encoding.validate();
  if (n_bins < 5) throw ConfigError("field: n_bins must be >= 5");
  if (hidden_width < 1 || hidden_layers < 1 || feature_width < 1) {
    throw ConfigError("field: layer sizes must be positive");
  }
  if (direction_frequencies < 1) throw ConfigError("field: direction_frequencies must be >= 1");
}

namespace {

double softplus(double x) {
  // log1p(exp(x)) without overflow.
  return x > 0.0 ? x + std::log1p(std::exp(-x)) : std::log1p(std::exp(x));
}

double sigmoid(double x) {
  if (x >= 0.0) return 1.0 / (1.0 + std::exp(-x));
  const double e = std::exp(x);
  return e / (1.0 + e);
}

void fill_uniform(Matrix& m, double bound, Rng& rng) {
  for (Eigen::Index i = 0; i < m.size(); ++i) m.data()[i] = uniform(rng, -bound, bound);
}

Mlp make_mlp(std::size_t in, int width, int hidden_layers, std::size_t out, Rng& rng) {
  Mlp mlp;
  std::size_t fan_in = in;
  for (int l = 0; l < hidden_layers; ++l) {
    DenseLayer layer{Matrix(width, static_cast<Eigen::Index>(fan_in)), Vector::Zero(width)};
    fill_uniform(layer.weight, std::sqrt(6.0 / static_cast<double>(fan_in)), rng);  // He-uniform
    mlp.layers.push_back(std::move(layer));
    fan_in = static_cast<std::size_t>(width);
  }
  mlp.layers.push_back(DenseLayer{Matrix::Zero(static_cast<Eigen::Index>(out), width),
                                  Vector::Zero(static_cast<Eigen::Index>(out))});
  return mlp;
}

// inputs[l] receives the input of layer l; returns the head output.
Matrix mlp_forward(const Mlp& mlp, Matrix x, std::vector<Matrix>* inputs) {
  const std::size_t n = mlp.layers.size();
  if (inputs) inputs->clear();
  for (std::size_t l = 0; l < n; ++l) {
    const auto& layer = mlp.layers[l];
    Matrix z(layer.weight.rows(), x.cols());
    z.noalias() = layer.weight * x;
    z.colwise() += layer.bias;
    if (l + 1 < n) z = z.cwiseMax(0.0);
    if (inputs) {
      inputs->push_back(std::move(x));
    }
    x = std::move(z);
  }
  return x;
}

// Returns d(loss)/d(input of layer 0).
Matrix mlp_backward(const Mlp& mlp, const std::vector<Matrix>& inputs, Matrix grad_out, Mlp& grad) {
  const std::size_t n = mlp.layers.size();
  for (std::size_t l = n; l-- > 0;) {
    const auto& layer = mlp.layers[l];
    auto& g = grad.layers[l];
    g.weight.noalias() += grad_out * inputs[l].transpose();
    g.bias.noalias() += grad_out.rowwise().sum();
    Matrix grad_in(layer.weight.cols(), grad_out.cols());
    grad_in.noalias() = layer.weight.transpose() * grad_out;
    if (l > 0) {
      // inputs[l] is the ReLU output of layer l-1.
      grad_in = (inputs[l].array() > 0.0).select(grad_in, 0.0);
    }
    grad_out = std::move(grad_in);
  }
  return grad_out;
}

Matrix attenuation_inputs(const FieldParams& params, std::span<const Vec3> positions,
                          const Vec3& p_tx) {
  const auto& enc = params.config.encoding;
  const auto d = static_cast<Eigen::Index>(enc.output_dim());
  Matrix x(2 * d, static_cast<Eigen::Index>(positions.size()));
  Vector src(d);
  encode(p_tx, params.source_table, enc,
         std::span<double>(src.data(), static_cast<std::size_t>(d)));
  for (std::size_t j = 0; j < positions.size(); ++j) {
    auto col = x.col(static_cast<Eigen::Index>(j));
    encode(positions[j], params.position_table, enc,
           std::span<double>(col.data(), static_cast<std::size_t>(d)));
    col.tail(d) = src;
  }
  return x;
}

Matrix emission_inputs(const FieldParams& params, const Matrix& features,
                       std::span<const Vec3> directions, const Vec3& n_tx) {
  const auto& cfg = params.config;
  const auto fw = static_cast<Eigen::Index>(cfg.feature_width);
  const auto dd = static_cast<Eigen::Index>(direction_encoding_dim(cfg.direction_frequencies));
  Matrix x(fw + 2 * dd, features.cols());
  x.topRows(fw) = features;
  Vector tx(dd);
  encode_direction(n_tx, cfg.direction_frequencies,
                   std::span<double>(tx.data(), static_cast<std::size_t>(dd)));
  for (Eigen::Index j = 0; j < features.cols(); ++j) {
    auto col = x.col(j);
    encode_direction(directions[static_cast<std::size_t>(j)], cfg.direction_frequencies,
                     std::span<double>(col.data() + fw, static_cast<std::size_t>(dd)));
    col.tail(dd) = tx;
  }
  return x;
}

}  // namespace

FieldParams FieldParams::initialize(const FieldConfig& config, Rng& rng) {
  config.validate();
  FieldParams p;
  p.config = config;
  p.position_table = HashGridTables(config.encoding);
  p.source_table = HashGridTables(config.encoding);
  init_tables(p.position_table, config.table_init, rng);
  init_tables(p.source_table, config.table_init, rng);

  const auto nb = static_cast<Eigen::Index>(config.n_bins);
  p.attenuation = make_mlp(config.attenuation_input_dim(), config.hidden_width,
                           config.hidden_layers, config.attenuation_output_dim(), rng);
  {
    // Zero-weight sigma/beta rows, Glorot-uniform feature rows.
    auto& head = p.attenuation.layers.back();
    head.bias.head(nb).setConstant(config.sigma_bias);
    const double bound = std::sqrt(6.0 / (config.hidden_width + config.feature_width));
    Matrix feat(config.feature_width, config.hidden_width);
    fill_uniform(feat, bound, rng);
    head.weight.bottomRows(config.feature_width) = feat;
  }
  p.emission = make_mlp(config.emission_input_dim(), config.hidden_width, config.hidden_layers,
                        config.emission_output_dim(), rng);
  p.kk_scale = 1.0;
  round_to_storage(p);
  return p;
}

FieldParams FieldParams::zeros_like() const {
  FieldParams z = *this;
  z.set_zero();
  return z;
}

void FieldParams::set_zero() {
  for_each_tensor(
      [](const std::string&, std::span<double> v) { std::fill(v.begin(), v.end(), 0.0); });
}

std::size_t FieldParams::parameter_count() const {
  std::size_t n = 0;
  for_each_tensor([&n](const std::string&, std::span<const double> v) { n += v.size(); });
  return n;
}

void round_to_storage(FieldParams& params) {
  params.for_each_tensor([](const std::string&, std::span<double> v) {
    for (double& x : v) x = static_cast<double>(static_cast<float>(x));
  });
}

FieldOutputs evaluate_field(const FieldParams& params, std::span<const Vec3> positions,
                            const Vec3& p_tx, std::span<const Vec3> directions, const Vec3& n_tx,
                            FieldTape* tape) {
  if (positions.size() != directions.size()) {
    throw InvalidInput("evaluate_field: positions/directions length mismatch");
  }
  const auto& cfg = params.config;
  const auto nb = static_cast<Eigen::Index>(cfg.n_bins);
  const auto fw = static_cast<Eigen::Index>(cfg.feature_width);

  std::vector<Matrix>* att_inputs = tape ? &tape->attenuation_inputs : nullptr;
  const Matrix head =
      mlp_forward(params.attenuation, attenuation_inputs(params, positions, p_tx), att_inputs);

  FieldOutputs out;
  out.sigma = head.topRows(nb).unaryExpr([](double x) { return softplus(x); });
  out.beta = head.middleRows(nb, nb);
  const Matrix features = head.bottomRows(fw);

  std::vector<Matrix>* emi_inputs = tape ? &tape->emission_inputs : nullptr;
  const Matrix s =
      mlp_forward(params.emission, emission_inputs(params, features, directions, n_tx), emi_inputs);
  out.s_re = s.topRows(nb);
  out.s_im = s.bottomRows(nb);

  if (tape) {
    tape->positions.assign(positions.begin(), positions.end());
    tape->p_tx = p_tx;
    tape->sigma_raw = head.topRows(nb);
  }
  return out;
}

void field_backward(const FieldParams& params, const FieldTape& tape,
                    const FieldOutputGrads& upstream, FieldParams& grad) {
  const auto& cfg = params.config;
  const auto nb = static_cast<Eigen::Index>(cfg.n_bins);
  const auto fw = static_cast<Eigen::Index>(cfg.feature_width);
  const auto cols = static_cast<Eigen::Index>(tape.positions.size());

  Matrix emi_out(2 * nb, cols);
  emi_out.topRows(nb) = upstream.s_re;
  emi_out.bottomRows(nb) = upstream.s_im;
  const Matrix emi_in_grad =
      mlp_backward(params.emission, tape.emission_inputs, std::move(emi_out), grad.emission);

  Matrix att_out(2 * nb + fw, cols);
  att_out.topRows(nb) =
      upstream.sigma.cwiseProduct(tape.sigma_raw.unaryExpr([](double x) { return sigmoid(x); }));
  att_out.middleRows(nb, nb) = upstream.beta;
  att_out.bottomRows(fw) = emi_in_grad.topRows(fw);
  const Matrix att_in_grad = mlp_backward(params.attenuation, tape.attenuation_inputs,
                                          std::move(att_out), grad.attenuation);

  const auto& enc = cfg.encoding;
  const auto d = static_cast<Eigen::Index>(enc.output_dim());
  for (Eigen::Index j = 0; j < cols; ++j) {
    encode_backward(tape.positions[static_cast<std::size_t>(j)],
                    std::span<const double>(att_in_grad.col(j).data(), static_cast<std::size_t>(d)),
                    grad.position_table, enc);
  }
  // Every column shares p_tx, so its table gradient is the column sum.
  const Vector src_grad = att_in_grad.bottomRows(d).rowwise().sum();
  encode_backward(tape.p_tx, std::span<const double>(src_grad.data(), static_cast<std::size_t>(d)),
                  grad.source_table, enc);
}

std::pair<AttenuationSample, std::vector<double>> eval_attenuation(const Vec3& p, const Vec3& p_tx,
                                                                   const FieldParams& params) {
  const auto& cfg = params.config;
  const auto nb = static_cast<Eigen::Index>(cfg.n_bins);
  const auto fw = static_cast<Eigen::Index>(cfg.feature_width);
  const Vec3 pts[1] = {p};
  const Matrix head =
      mlp_forward(params.attenuation, attenuation_inputs(params, pts, p_tx), nullptr);
  AttenuationSample a;
  a.sigma.resize(cfg.n_bins);
  a.beta.resize(cfg.n_bins);
  for (Eigen::Index i = 0; i < nb; ++i) {
    a.sigma[static_cast<std::size_t>(i)] = softplus(head(i, 0));
    a.beta[static_cast<std::size_t>(i)] = head(nb + i, 0);
  }
  std::vector<double> features(static_cast<std::size_t>(fw));
  for (Eigen::Index i = 0; i < fw; ++i) features[static_cast<std::size_t>(i)] = head(2 * nb + i, 0);
  return {std::move(a), std::move(features)};
}

EmissionSample eval_emission(std::span<const double> features, const Vec3& n_dir, const Vec3& n_tx,
                             const FieldParams& params) {
  const auto& cfg = params.config;
  if (features.size() != static_cast<std::size_t>(cfg.feature_width)) {
    throw InvalidInput("eval_emission: feature length mismatch");
  }
  const auto nb = static_cast<Eigen::Index>(cfg.n_bins);
  const Matrix feat = Eigen::Map<const Matrix>(features.data(), cfg.feature_width, 1);
  const Vec3 dirs[1] = {n_dir};
  const Matrix s = mlp_forward(params.emission, emission_inputs(params, feat, dirs, n_tx), nullptr);
  EmissionSample e;
  e.s.resize(cfg.n_bins);
  for (Eigen::Index i = 0; i < nb; ++i)
    e.s[static_cast<std::size_t>(i)] = Complex(s(i, 0), s(nb + i, 0));
  return e;
}

}  // namespace freqfield
