#include <iostream>

#include <CLI11.hpp>

#include "commands.hpp"

namespace {

void add_common(CLI::App* cmd, afcsim::RunOptions& o) {
  cmd->add_option("--out", o.out, "Output directory (overrides the config)");
  cmd->add_option("--seed", o.seed, "Random seed (overrides the config)");
  cmd->add_option("--threads", o.threads, "Worker threads")->check(CLI::Range(1u, 1024u));
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"Atomic frequency comb simulator for warm Rb-87 vapour"};
  app.require_subcommand(1);
  afcsim::RunOptions o;

  auto* spectrum = app.add_subcommand("spectrum", "Prepare the comb and write the D2 probe spectrum");
  spectrum->add_option("--config", o.config, "Experiment config (YAML)")->required();
  add_common(spectrum, o);

  auto* echo = app.add_subcommand("echo", "Propagate probe pulses through the prepared comb");
  echo->add_option("--config", o.config, "Experiment config (YAML)")->required();
  add_common(echo, o);

  auto* metrics = app.add_subcommand("metrics", "Quantum-performance report for rows of mu_in, eta_afc, sbr");
  metrics->add_option("--config", o.config, "Experiment config (YAML)");
  metrics->add_option("--input", o.input, "CSV with columns mu_in, eta_afc, sbr");
  add_common(metrics, o);

  auto* fit = app.add_subcommand("fit", "Fit the forward model to a measured spectrum");
  fit->add_option("--config", o.config, "Experiment config (YAML)")->required();
  fit->add_option("--measured", o.measured, "Measured spectrum CSV (overrides the config)");
  add_common(fit, o);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? afcsim::exit_success : afcsim::exit_config;
  }

  return afcsim::guarded(
      [&] {
        if (*spectrum) afcsim::run_spectrum(o);
        if (*echo) afcsim::run_echo(o);
        if (*metrics) afcsim::run_metrics(o);
        if (*fit) afcsim::run_fit(o);
      },
      std::cerr);
}
