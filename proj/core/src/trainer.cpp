// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "freqfield/trainer.hpp"

#include <chrono>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <limits>
#include <sstream>

#include "binary_io.hpp"
#include "freqfield/config_io.hpp"
#include "freqfield/error.hpp"

namespace freqfield {

LossWeights LossSettings::weights(const FrequencyGrid& grid) const {
  LossWeights w = make_perceptual_weights(grid, profile);
  w.lambda_spec = lambda_spec;
  w.lambda_mag = lambda_mag;
  w.lambda_phase = lambda_phase;
  w.lambda_env = lambda_env;
  w.lambda_kk = lambda_kk;
  w.env_alpha = env_alpha;
  w.env_epsilon = env_epsilon;
  return w;
}

KKContext LossSettings::kk_context(std::size_t n_bins) const {
  return KKContext::default_for(n_bins, kk_taper_fraction);
}

void TrainConfig::validate() const {
  if (!(adam.learning_rate > 0.0)) throw ConfigError("train.learning_rate must be > 0");
  if (!(adam.beta1 >= 0.0 && adam.beta1 < 1.0) || !(adam.beta2 >= 0.0 && adam.beta2 < 1.0))
    throw ConfigError("train.beta1 and train.beta2 must lie in [0, 1)");
  if (!(adam.epsilon > 0.0)) throw ConfigError("train.epsilon must be > 0");
  if (batch_size < 1) throw ConfigError("train.batch_size must be >= 1");
  if (n_steps < 0) throw ConfigError("train.n_steps must be >= 0");
  if (checkpoint_every < 1) throw ConfigError("train.checkpoint_every must be >= 1");
  if (kk_points < 0) throw ConfigError("train.kk_points must be >= 0");
  for (double l :
       {loss.lambda_spec, loss.lambda_mag, loss.lambda_phase, loss.lambda_env, loss.lambda_kk})
    if (!(l >= 0.0)) throw ConfigError("loss lambdas must be >= 0");
  if (!(loss.env_alpha > 0.0 && loss.env_alpha <= 1.0))
    throw ConfigError("loss.env_alpha must lie in (0, 1]");
  if (!(loss.env_epsilon > 0.0)) throw ConfigError("loss.env_epsilon must be > 0");
  if (!(loss.kk_taper_fraction >= 0.0 && loss.kk_taper_fraction < 0.5))
    throw ConfigError("loss.kk_taper_fraction must lie in [0, 0.5)");
}

void adam_step(std::span<double> params, std::span<const double> grads, std::span<double> m,
               std::span<double> v, std::int64_t step, const AdamConfig& c) {
  if (grads.size() != params.size() || m.size() != params.size() || v.size() != params.size())
    throw InvalidInput("adam_step: buffer sizes differ");
  if (step < 1) throw InvalidInput("adam_step: step must be >= 1");
  const double bc1 = 1.0 - std::pow(c.beta1, static_cast<double>(step));
  const double bc2 = 1.0 - std::pow(c.beta2, static_cast<double>(step));
  for (std::size_t i = 0; i < params.size(); ++i) {
    const double g = grads[i];
    m[i] = c.beta1 * m[i] + (1.0 - c.beta1) * g;
    v[i] = c.beta2 * v[i] + (1.0 - c.beta2) * g * g;
    params[i] -= c.learning_rate * (m[i] / bc1) / (std::sqrt(v[i] / bc2) + c.epsilon);
  }
}

namespace {

std::vector<std::span<double>> tensors(FieldParams& p) {
  std::vector<std::span<double>> out;
  p.for_each_tensor([&out](const std::string&, std::span<double> v) { out.push_back(v); });
  return out;
}

std::vector<std::span<const double>> tensors(const FieldParams& p) {
  std::vector<std::span<const double>> out;
  p.for_each_tensor([&out](const std::string&, std::span<const double> v) { out.push_back(v); });
  return out;
}

// Finite at storage precision: anything beyond the float32 range counts as
// divergence.
bool storable(double x) {
  return std::isfinite(x) && std::abs(x) <= std::numeric_limits<float>::max();
}

bool all_finite(const LossBreakdown& l) {
  return storable(l.spec) && storable(l.mag) && storable(l.phase) && storable(l.env) &&
         storable(l.kk) && storable(l.total);
}

Json breakdown_json(const LossBreakdown& l) {
  auto num = [](double x) { return std::isfinite(x) ? Json(x) : Json(std::to_string(x)); };
  return {{"spec", num(l.spec)}, {"mag", num(l.mag)}, {"phase", num(l.phase)},
          {"env", num(l.env)},   {"kk", num(l.kk)},   {"total", num(l.total)}};
}

}  // namespace

void adam_step(FieldParams& params, const FieldParams& grads, FieldParams& m, FieldParams& v,
               std::int64_t step, const AdamConfig& config) {
  auto p = tensors(params);
  const auto g = tensors(grads);
  auto mm = tensors(m);
  auto vv = tensors(v);
  if (g.size() != p.size() || mm.size() != p.size() || vv.size() != p.size())
    throw InvalidInput("adam_step: parameter structures differ");
  for (std::size_t t = 0; t < p.size(); ++t) adam_step(p[t], g[t], mm[t], vv[t], step, config);
}

double global_norm(const FieldParams& grads) {
  double sum = 0.0;
  grads.for_each_tensor([&sum](const std::string&, std::span<const double> v) {
    for (double x : v) sum += x * x;
  });
  return std::sqrt(sum);
}

void scale_gradients(FieldParams& grads, double factor) {
  grads.for_each_tensor([factor](const std::string&, std::span<double> v) {
    for (double& x : v) x *= factor;
  });
}

Checkpoint Checkpoint::initial(const TrainConfig& train, const RenderConfig& render,
                               const FieldConfig& field, const FrequencyGrid& grid) {
  train.validate();
  render.validate();
  field.validate();
  if (field.n_bins != grid.n_bins())
    throw ConfigError("field.n_bins (" + std::to_string(field.n_bins) +
                      ") does not match the frequency grid (" + std::to_string(grid.n_bins()) +
                      ")");
  Checkpoint c;
  c.train = train;
  c.render = render;
  c.grid = grid;
  c.rng.seed(train.seed);
  c.params = FieldParams::initialize(field, c.rng);
  c.adam_m = c.params.zeros_like();
  c.adam_v = c.params.zeros_like();
  return c;
}

Trainer::Trainer(const OracleDataset& dataset, Checkpoint start)
    : dataset_(dataset), ckpt_(std::move(start)) {
  if (dataset_.grid != ckpt_.grid)
    throw DataError("dataset frequency grid (n_fft " + std::to_string(dataset_.grid.n_fft()) +
                    ") does not match the checkpoint grid (n_fft " +
                    std::to_string(ckpt_.grid.n_fft()) + ")");
  if (dataset_.train.empty()) throw DataError("dataset has no training receivers");
  ckpt_.train.validate();
  weights_ = ckpt_.train.loss.weights(ckpt_.grid);
  kk_ctx_ = ckpt_.train.loss.kk_context(ckpt_.grid.n_bins());
  grads_ = ckpt_.params.zeros_like();
}

StepLog Trainer::step() {
  const auto t0 = std::chrono::steady_clock::now();
  const TrainConfig& tc = ckpt_.train;
  Rng& rng = ckpt_.rng;
  const FieldParams& params = ckpt_.params;

  // Batch: distinct training receivers by partial Fisher-Yates.
  std::vector<std::size_t> pool = dataset_.train;
  const std::size_t batch =
      std::min<std::size_t>(static_cast<std::size_t>(tc.batch_size), pool.size());
  for (std::size_t i = 0; i < batch; ++i)
    std::swap(pool[i], pool[i + uniform_index(rng, pool.size() - i)]);
  pool.resize(batch);

  std::vector<RenderTape> tapes(batch);
  std::vector<ComplexSpectrum> preds(batch);
  for (std::size_t b = 0; b < batch; ++b)
    preds[b] = render_receiver(dataset_.queries[pool[b]], params, ckpt_.render, ckpt_.grid, &rng,
                               &tapes[b]);

  const std::size_t nb = ckpt_.grid.n_bins();
  grads_.set_zero();
  LossBreakdown loss;

  // Kramers-Kronig term on a random subset of the rendered samples.
  std::vector<FieldOutputGrads> extra(batch);
  const std::size_t points = tapes.front().rays.n_points();
  const auto k_pts = static_cast<std::size_t>(tc.kk_points);
  if (k_pts > 0 && tc.loss.lambda_kk > 0.0) {
    std::vector<std::pair<std::size_t, std::size_t>> picks(k_pts);
    Matrix sigma(nb, k_pts), beta(nb, k_pts);
    for (std::size_t k = 0; k < k_pts; ++k) {
      const std::size_t flat = uniform_index(rng, batch * points);
      picks[k] = {flat / points, flat % points};
      sigma.col(static_cast<Eigen::Index>(k)) =
          tapes[picks[k].first].outputs.sigma.col(static_cast<Eigen::Index>(picks[k].second));
      beta.col(static_cast<Eigen::Index>(k)) =
          tapes[picks[k].first].outputs.beta.col(static_cast<Eigen::Index>(picks[k].second));
    }
    KKGradients kg;
    loss.kk = loss_kk(sigma, beta, params.kk_scale, kk_ctx_, &kg);
    const double lam = tc.loss.lambda_kk;
    for (std::size_t k = 0; k < k_pts; ++k) {
      auto& e = extra[picks[k].first];
      if (e.sigma.size() == 0) {
        const auto cols = static_cast<Eigen::Index>(points);
        e.sigma = Matrix::Zero(static_cast<Eigen::Index>(nb), cols);
        e.beta = Matrix::Zero(static_cast<Eigen::Index>(nb), cols);
        e.s_re = Matrix::Zero(static_cast<Eigen::Index>(nb), cols);
        e.s_im = Matrix::Zero(static_cast<Eigen::Index>(nb), cols);
      }
      const auto col = static_cast<Eigen::Index>(picks[k].second);
      e.sigma.col(col) += lam * kg.sigma.col(static_cast<Eigen::Index>(k));
      e.beta.col(col) += lam * kg.beta.col(static_cast<Eigen::Index>(k));
    }
    grads_.kk_scale += lam * kg.kappa;
  }

  const double inv_b = 1.0 / static_cast<double>(batch);
  for (std::size_t b = 0; b < batch; ++b) {
    LossGradients lg;
    const LossBreakdown lb = loss_total(dataset_.spectra[pool[b]], preds[b], nullptr, nullptr,
                                        params.kk_scale, weights_, kk_ctx_, &lg);
    loss.spec += inv_b * lb.spec;
    loss.mag += inv_b * lb.mag;
    loss.phase += inv_b * lb.phase;
    loss.env += inv_b * lb.env;
    loss.total += inv_b * lb.total;
    for (Complex& g : lg.pred) g *= inv_b;
    render_backward(params, ckpt_.render, ckpt_.grid, tapes[b], lg.pred, grads_,
                    extra[b].sigma.size() ? &extra[b] : nullptr);
    tapes[b] = RenderTape{};
  }
  loss.total += tc.loss.lambda_kk * loss.kk;

  StepLog log;
  log.loss = loss;
  log.grad_norm = global_norm(grads_);
  if (!all_finite(loss) || !storable(log.grad_norm)) {
    if (dump_dir_) {
      Json dump;
      dump["step"] = ckpt_.step + 1;
      dump["batch"] = pool;
      Json queries = Json::array();
      for (std::size_t i : pool) queries.push_back(to_json(dataset_.queries[i]));
      dump["queries"] = queries;
      dump["loss"] = breakdown_json(loss);
      dump["grad_norm"] =
          std::isfinite(log.grad_norm) ? Json(log.grad_norm) : Json(std::to_string(log.grad_norm));
      std::filesystem::create_directories(*dump_dir_);
      detail::write_text(*dump_dir_ / "abort_dump.json", dump_canonical(dump));
    }
    std::ostringstream msg;
    msg << "loss or gradient not representable in float32 at step " << ckpt_.step + 1 << " (total "
        << loss.total << ", grad norm " << log.grad_norm << ")";
    throw NumericalError(msg.str());
  }

  if (tc.grad_clip_norm > 0.0 && log.grad_norm > tc.grad_clip_norm)
    scale_gradients(grads_, tc.grad_clip_norm / log.grad_norm);
  ++ckpt_.step;
  adam_step(ckpt_.params, grads_, ckpt_.adam_m, ckpt_.adam_v, ckpt_.step, tc.adam);
  round_to_storage(ckpt_.params);
  round_to_storage(ckpt_.adam_m);
  round_to_storage(ckpt_.adam_v);

  log.step = ckpt_.step;
  log.wall_ms =
      std::chrono::duration<double, std::milli>(std::chrono::steady_clock::now() - t0).count();
  return log;
}

std::string train_log_header() { return "step,spec,mag,phase,env,kk,total,wall_ms\n"; }

std::string train_log_row(const StepLog& log) {
  std::ostringstream os;
  os << std::setprecision(9) << log.step << ',' << log.loss.spec << ',' << log.loss.mag << ','
     << log.loss.phase << ',' << log.loss.env << ',' << log.loss.kk << ',' << log.loss.total << ','
     << std::setprecision(6) << log.wall_ms << '\n';
  return os.str();
}

Checkpoint train(const OracleDataset& dataset, Checkpoint start, const TrainOptions& options) {
  Trainer trainer(dataset, std::move(start));
  const TrainConfig& tc = trainer.checkpoint().train;
  std::ofstream log;
  if (options.out_dir) {
    std::error_code ec;
    std::filesystem::create_directories(*options.out_dir, ec);
    if (ec) throw DataError(options.out_dir->string() + ": cannot create directory");
    trainer.set_dump_dir(*options.out_dir);
    const auto log_path = *options.out_dir / "train_log.csv";
    const bool fresh = trainer.checkpoint().step == 0 || !std::filesystem::exists(log_path);
    log.open(log_path, fresh ? std::ios::trunc : std::ios::app);
    if (!log) throw DataError(log_path.string() + ": cannot open for writing");
    if (fresh) log << train_log_header();
  }
  auto save = [&](const Checkpoint& c) {
    if (!options.out_dir) return;
    std::ostringstream name;
    name << "ckpt_" << std::setw(6) << std::setfill('0') << c.step << ".ffck";
    save_checkpoint(c, *options.out_dir / name.str());
    save_checkpoint(c, *options.out_dir / "latest.ffck");
  };
  if (trainer.checkpoint().step >= tc.n_steps) {
    save(trainer.checkpoint());
    return trainer.checkpoint();
  }
  while (trainer.checkpoint().step < tc.n_steps) {
    const StepLog s = trainer.step();
    if (log.is_open()) {
      log << train_log_row(s);
      log.flush();
    }
    if (options.on_step) options.on_step(s);
    if (s.step % tc.checkpoint_every == 0 || s.step == tc.n_steps) save(trainer.checkpoint());
  }
  return trainer.checkpoint();
}

}  // namespace freqfield
