// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#include <benchmark/benchmark.h>

#include <random>

#include "freqfield/config_io.hpp"
#include "freqfield/encoding.hpp"
#include "freqfield/losses.hpp"
#include "freqfield/oracle.hpp"
#include "freqfield/renderer.hpp"
#include "freqfield/spectra.hpp"
#include "freqfield/trainer.hpp"

namespace {

using namespace freqfield;

const FrequencyGrid kGrid(512, 16000.0);

FieldParams desk_params() {
  const RunConfig rc = RunConfig::preset("desk");
  Rng rng(1);
  return FieldParams::initialize(rc.field, rng);
}

std::vector<Vec3> random_points(std::size_t n, const Box3& box, std::uint64_t seed) {
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  std::vector<Vec3> out(n);
  for (Vec3& p : out) {
    const Vec3 t(u(rng), u(rng), u(rng));
    p = box.lo + (box.hi - box.lo).cwiseProduct(t);
  }
  return out;
}

void BM_Encode(benchmark::State& state) {
  const FieldParams p = desk_params();
  const auto pts = random_points(256, p.config.encoding.bounds, 2);
  std::vector<double> out(p.config.encoding.output_dim());
  for (auto _ : state) {
    for (const Vec3& x : pts) encode(x, p.position_table, p.config.encoding, out);
    benchmark::DoNotOptimize(out.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(pts.size()));
}
BENCHMARK(BM_Encode);

void BM_FieldForward(benchmark::State& state) {
  const FieldParams p = desk_params();
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto pts = random_points(n, p.config.encoding.bounds, 3);
  const std::vector<Vec3> dirs(n, Vec3::UnitX());
  for (auto _ : state) {
    const FieldOutputs out =
        evaluate_field(p, pts, Vec3(0.35, 0.5, 0.4), dirs, Vec3::UnitX(), nullptr);
    benchmark::DoNotOptimize(out.sigma.data());
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}
BENCHMARK(BM_FieldForward)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_FieldBackward(benchmark::State& state) {
  const FieldParams p = desk_params();
  const auto n = static_cast<std::size_t>(state.range(0));
  const auto pts = random_points(n, p.config.encoding.bounds, 4);
  const std::vector<Vec3> dirs(n, Vec3::UnitX());
  FieldTape tape;
  const FieldOutputs out = evaluate_field(p, pts, Vec3(0.35, 0.5, 0.4), dirs, Vec3::UnitX(), &tape);
  const FieldOutputGrads up{Matrix::Ones(out.sigma.rows(), out.sigma.cols()),
                            Matrix::Ones(out.beta.rows(), out.beta.cols()), out.s_re, out.s_im};
  FieldParams grad = p.zeros_like();
  for (auto _ : state) {
    field_backward(p, tape, up, grad);
    benchmark::ClobberMemory();
  }
  state.SetItemsProcessed(state.iterations() * static_cast<int64_t>(n));
}
BENCHMARK(BM_FieldBackward)->Arg(256)->Arg(2048)->Unit(benchmark::kMillisecond);

void BM_RenderReceiver(benchmark::State& state) {
  const FieldParams p = desk_params();
  const RenderConfig rc = RenderConfig::desk();
  SceneQuery q;
  q.p_tx = Vec3(0.35, 0.5, 0.4);
  q.p_rx = Vec3(1.2, 0.8, 0.6);
  for (auto _ : state) {
    const ComplexSpectrum h = render_receiver(q, p, rc, kGrid);
    benchmark::DoNotOptimize(h.values.data());
  }
}
BENCHMARK(BM_RenderReceiver)->Unit(benchmark::kMillisecond);

void BM_LossTotal(benchmark::State& state) {
  const ShoeboxScene scene = ShoeboxScene::desk();
  SceneQuery q;
  q.p_tx = Vec3(0.35, 0.5, 0.4);
  q.p_rx = Vec3(1.2, 0.8, 0.6);
  const ComplexSpectrum truth = image_source_response(scene, q, kGrid, 343.0);
  q.p_rx = Vec3(1.1, 0.8, 0.6);
  const ComplexSpectrum pred = image_source_response(scene, q, kGrid, 343.0);
  const LossSettings settings;
  const LossWeights w = settings.weights(kGrid);
  const KKContext ctx = settings.kk_context(kGrid.n_bins());
  LossGradients g;
  for (auto _ : state) {
    const LossBreakdown l = loss_total(truth, pred, nullptr, nullptr, 1.0, w, ctx, &g);
    benchmark::DoNotOptimize(l.total);
  }
}
BENCHMARK(BM_LossTotal);

void BM_HilbertKK(benchmark::State& state) {
  const auto n = static_cast<std::size_t>(state.range(0));
  std::vector<double> x(n);
  for (std::size_t i = 0; i < n; ++i) x[i] = 1.0 / (1.0 + 0.01 * static_cast<double>(i));
  for (auto _ : state) {
    const auto h = hilbert_kk(x, 0.1);
    benchmark::DoNotOptimize(h.data());
  }
}
BENCHMARK(BM_HilbertKK)->Arg(257)->Arg(2049);

void BM_TrainStep(benchmark::State& state) {
  RunConfig rc = RunConfig::preset("desk");
  rc.train.batch_size = static_cast<int>(state.range(0));
  const OracleDataset ds = generate_dataset(rc.scene, rc.dataset);
  Trainer trainer(ds, Checkpoint::initial(rc.train, rc.render, rc.field, ds.grid));
  for (auto _ : state) {
    const StepLog s = trainer.step();
    benchmark::DoNotOptimize(s.loss.total);
  }
}
BENCHMARK(BM_TrainStep)->Arg(1)->Arg(4)->Unit(benchmark::kMillisecond)->Iterations(3);

}  // namespace

BENCHMARK_MAIN();
