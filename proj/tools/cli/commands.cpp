// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#include "commands.hpp"

#include <iomanip>
#include <limits>
#include <ostream>

#include "field_map.hpp"
#include "freqfield/error.hpp"
#include "freqfield/trainer.hpp"
#include "io_util.hpp"

namespace freqfield::cli {

RunConfig resolve_config(const ConfigOptions& options) {
  RunConfig rc = RunConfig::preset(options.preset);
  if (options.config) rc = load_run_config(*options.config, rc);
  if (options.seed) {
    rc.dataset.seed = *options.seed;
    rc.train.seed = *options.seed;
  }
  if (options.weights) {
    try {
      rc.train.loss.profile = WeightProfile::parse(*options.weights);
    } catch (const InvalidInput& e) {
      throw ConfigError(std::string("--weights: ") + e.what());
    }
  }
  rc.finalize();
  rc.validate();
  return rc;
}

namespace {

void echo_config(const RunConfig& rc, const std::filesystem::path& out) {
  std::filesystem::create_directories(out);
  write_text_file(out / "effective_config.json", dump_canonical(to_json(rc)));
}

// The dataset defines the scene, grid and source; the encoding box follows
// the room unless the config moved it.
void adopt_dataset(RunConfig& rc, const OracleDataset& ds) {
  const Box3& b = rc.field.encoding.bounds;
  if (b.lo == rc.scene.box().lo && b.hi == rc.scene.box().hi)
    rc.field.encoding.bounds = ds.scene.box();
  rc.scene = ds.scene;
  rc.dataset = ds.spec;
  rc.finalize();
  rc.validate();
}

}  // namespace

void run_generate(const GenerateCommand& cmd, std::ostream& log) {
  const RunConfig rc = resolve_config(cmd.config);
  const OracleDataset ds = generate_dataset(rc.scene, rc.dataset);
  write_dataset(ds, cmd.out);
  echo_config(rc, cmd.out);
  log << ds.size() << " receivers, " << ds.grid.n_bins() << " bins\n"
      << ds.train.size() << " train / " << ds.held_out.size() << " held-out\n"
      << "wrote " << cmd.out.string() << "\n";
}

void run_train(const TrainCommand& cmd, std::ostream& log) {
  RunConfig rc = resolve_config(cmd.config);
  const OracleDataset ds = read_dataset(cmd.dataset);
  adopt_dataset(rc, ds);
  if (cmd.steps) rc.train.n_steps = *cmd.steps;
  rc.train.validate();

  Checkpoint start;
  if (cmd.resume) {
    start = load_checkpoint(*cmd.resume);
    start.train.n_steps = rc.train.n_steps;
    log << "resuming at step " << start.step << "\n";
  } else {
    start = Checkpoint::initial(rc.train, rc.render, rc.field, ds.grid);
  }
  if (start.grid != ds.grid)
    throw DataError("checkpoint frequency grid does not match the dataset");
  echo_config(rc, cmd.out);

  TrainOptions opts;
  opts.out_dir = cmd.out;
  const std::int64_t every = std::max<std::int64_t>(1, cmd.log_every);
  opts.on_step = [&](const StepLog& s) {
    if (s.step % every == 0 || s.step == rc.train.n_steps)
      log << "step " << s.step << " loss " << std::setprecision(6) << s.loss.total << " (spec "
          << s.loss.spec << " mag " << s.loss.mag << " phase " << s.loss.phase << " env "
          << s.loss.env << " kk " << s.loss.kk << ") " << std::setprecision(4) << s.wall_ms
          << " ms\n"
          << std::flush;
  };
  const Checkpoint done = train(ds, std::move(start), opts);
  log << "finished at step " << done.step << "; checkpoint " << (cmd.out / "latest.ffck").string()
      << "\n";
}

std::vector<ComplexSpectrum> held_out_truth(const OracleDataset& dataset) {
  std::vector<ComplexSpectrum> out;
  out.reserve(dataset.held_out.size());
  for (std::size_t i : dataset.held_out) out.push_back(dataset.spectra[i]);
  return out;
}

std::vector<ComplexSpectrum> nearest_neighbor_baseline(const OracleDataset& dataset) {
  if (dataset.train.empty()) throw DataError("dataset has no training receivers");
  std::vector<ComplexSpectrum> out;
  out.reserve(dataset.held_out.size());
  for (std::size_t h : dataset.held_out) {
    std::size_t best = dataset.train.front();
    double best_d = std::numeric_limits<double>::infinity();
    for (std::size_t t : dataset.train) {
      const double d = (dataset.queries[t].p_rx - dataset.queries[h].p_rx).squaredNorm();
      if (d < best_d) {
        best_d = d;
        best = t;
      }
    }
    out.push_back(dataset.spectra[best]);
  }
  return out;
}

std::vector<ComplexSpectrum> render_held_out(const Checkpoint& ckpt, const OracleDataset& dataset) {
  if (ckpt.grid != dataset.grid)
    throw DataError("checkpoint grid (n_fft " + std::to_string(ckpt.grid.n_fft()) + ", " +
                    std::to_string(ckpt.grid.sample_rate()) +
                    " Hz) does not match dataset grid (n_fft " +
                    std::to_string(dataset.grid.n_fft()) + ", " +
                    std::to_string(dataset.grid.sample_rate()) + " Hz)");
  std::vector<ComplexSpectrum> out;
  out.reserve(dataset.held_out.size());
  for (std::size_t i : dataset.held_out)
    out.push_back(render_receiver(dataset.queries[i], ckpt.params, ckpt.render, ckpt.grid));
  return out;
}

namespace {

void write_report(const EvalReport& r, const std::filesystem::path& dir, const std::string& stem) {
  write_text_file(dir / (stem + "_report.json"), report_json(r));
  write_text_file(dir / (stem + "_report.csv"), report_csv(r));
  write_text_file(dir / (stem + "_per_band.csv"), per_band_csv(r));
}

void print_summary(const std::string& label, const EvalReport& r, std::ostream& log) {
  log << std::left << std::setw(10) << label << std::right << std::setprecision(5) << " amp "
      << r.amp_err << "  ang " << r.ang_err << "  spec " << r.spec_err << "  stft " << r.stft_err
      << "  energy " << r.energy_err << "  env " << r.env_err << "\n";
}

}  // namespace

void run_eval(const EvalCommand& cmd, std::ostream& log) {
  const OracleDataset ds = read_dataset(cmd.dataset);
  if (ds.held_out.empty()) throw DataError("dataset has no held-out receivers");
  const auto truth = held_out_truth(ds);

  std::vector<ComplexSpectrum> pred;
  if (cmd.self_test) {
    pred = truth;
  } else {
    if (!cmd.checkpoint) throw ConfigError("eval needs --checkpoint (or --self-test)");
    pred = render_held_out(load_checkpoint(*cmd.checkpoint), ds);
  }
  std::filesystem::create_directories(cmd.out);
  const EvalReport model = evaluate(truth, pred, cmd.bands, cmd.band_width_hz);
  const EvalReport baseline =
      evaluate(truth, nearest_neighbor_baseline(ds), cmd.bands, cmd.band_width_hz);
  write_report(model, cmd.out, cmd.self_test ? "self_test" : "model");
  write_report(baseline, cmd.out, "baseline");
  log << ds.held_out.size() << " held-out receivers\n";
  print_summary(cmd.self_test ? "self-test" : "model", model, log);
  print_summary("baseline", baseline, log);
}

void run_render_map(const RenderMapCommand& cmd, std::ostream& log) {
  RunConfig rc = resolve_config(cmd.config);
  if (cmd.dataset) adopt_dataset(rc, read_dataset(*cmd.dataset));
  if (cmd.free_field) rc.scene = ShoeboxScene::free_field_scene(rc.scene.dimensions);
  if (cmd.ground_truth == cmd.checkpoint.has_value())
    throw ConfigError("render-map needs exactly one of --checkpoint or --ground-truth");

  const PlaneSpec plane = PlaneSpec::parse(cmd.plane, cmd.n_u, cmd.n_v);
  SceneQuery source;
  source.p_tx = rc.dataset.source;
  source.n_tx = rc.dataset.source_orientation;
  source.rx_orientation = rc.dataset.receiver_orientation;

  FieldMap map;
  if (cmd.ground_truth) {
    map = ground_truth_map(rc.scene, source, rc.dataset.grid, rc.dataset.speed_of_sound, plane,
                           cmd.freq_hz);
  } else {
    map = model_map(load_checkpoint(*cmd.checkpoint), rc.scene, source, plane, cmd.freq_hz);
  }
  write_field_map(map, cmd.out);
  echo_config(rc, cmd.out);
  log << plane.n_u << "x" << plane.n_v << " map at " << map.bin_hz << " Hz (bin " << map.bin
      << ") written to " << cmd.out.string() << "\n";
}

}  // namespace freqfield::cli
