// Copyright 2026 The freqfield Authors
// SPDX-License-Identifier: Apache-2.0

#include <CLI11.hpp>
#include <iostream>

#include "commands.hpp"
#include "freqfield/error.hpp"

namespace {

using namespace freqfield;
using namespace freqfield::cli;

void add_config_flags(CLI::App* app, ConfigOptions& c) {
  app->add_option("--config", c.config, "JSON run configuration")->check(CLI::ExistingFile);
  app->add_option("--preset", c.preset, "Base preset")
      ->check(CLI::IsMember({"desk", "full"}))
      ->capture_default_str();
  app->add_option("--seed", c.seed, "Seed for dataset split and training");
  app->add_option("--weights", c.weights,
                  "uniform | lowfreq-phase | crossover-notch:<center>:<width>:<depth>");
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Frequency-domain acoustic field toolkit"};
  app.require_subcommand(1);

  GenerateCommand gen;
  auto* g = app.add_subcommand("generate", "Generate an analytic shoebox dataset");
  add_config_flags(g, gen.config);
  g->add_option("--out", gen.out, "Output directory")->required();

  TrainCommand tr;
  auto* t = app.add_subcommand("train", "Train a field on a dataset");
  add_config_flags(t, tr.config);
  t->add_option("--dataset", tr.dataset, "Dataset directory")->required();
  t->add_option("--out", tr.out, "Output directory for checkpoints and log")->required();
  t->add_option("--resume", tr.resume, "Checkpoint to resume from");
  t->add_option("--steps", tr.steps, "Override train.n_steps");
  t->add_option("--log-every", tr.log_every, "Progress line interval")->capture_default_str();

  EvalCommand ev;
  auto* e = app.add_subcommand("eval", "Evaluate held-out receivers against a baseline");
  e->add_option("--checkpoint", ev.checkpoint, "Checkpoint file");
  e->add_option("--dataset", ev.dataset, "Dataset directory")->required();
  e->add_option("--out", ev.out, "Report directory")->required();
  e->add_flag("--self-test", ev.self_test, "Substitute ground truth for the predictions");
  e->add_option("--bands", ev.bands, "Band centres in Hz")->delimiter(',');
  e->add_option("--band-width", ev.band_width_hz, "Band width in Hz (default one-third octave)");

  RenderMapCommand rm;
  auto* r = app.add_subcommand("render-map", "Render |H| and phase on a plane");
  add_config_flags(r, rm.config);
  r->add_option("--checkpoint", rm.checkpoint, "Checkpoint file");
  r->add_flag("--ground-truth", rm.ground_truth, "Use the analytic oracle");
  r->add_flag("--free-field", rm.free_field, "Ground truth without walls");
  r->add_option("--dataset", rm.dataset, "Take scene and source from a dataset");
  r->add_option("--plane", rm.plane, "Plane, e.g. z=0.6")->capture_default_str();
  r->add_option(
       "--resolution",
       [&rm](const CLI::results_t& res) {
         return res.size() == 2 && CLI::detail::lexical_cast(res[0], rm.n_u) &&
                CLI::detail::lexical_cast(res[1], rm.n_v);
       },
       "Grid size NU,NV")
      ->expected(2)
      ->delimiter(',');
  r->add_option("--freq-hz", rm.freq_hz, "Frequency in Hz")->capture_default_str();
  r->add_option("--out", rm.out, "Output directory")->required();

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& err) {
    const int code = app.exit(err);
    return code == 0 ? kExitOk : kExitConfig;
  }

  try {
    if (*g) run_generate(gen, std::cout);
    if (*t) run_train(tr, std::cout);
    if (*e) run_eval(ev, std::cout);
    if (*r) run_render_map(rm, std::cout);
  } catch (const ConfigError& err) {
    std::cerr << "config error: " << err.what() << "\n";
    return kExitConfig;
  } catch (const InvalidInput& err) {
    std::cerr << "invalid input: " << err.what() << "\n";
    return kExitConfig;
  } catch (const DataError& err) {
    std::cerr << "data error: " << err.what() << "\n";
    return kExitData;
  } catch (const NumericalError& err) {
    std::cerr << "numerical error: " << err.what() << "\n";
    return kExitNumerical;
  } catch (const std::exception& err) {
    std::cerr << "error: " << err.what() << "\n";
    return kExitUsage;
  }
  return kExitOk;
}
