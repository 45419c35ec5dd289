#include <iostream>
#include <optional>
#include <string>

#include <CLI11.hpp>

#include <chstab/errors.hpp>
#include <chstab/feedback.hpp>

#include "chstab_app/config.hpp"
#include "chstab_app/run.hpp"

namespace app = chstab::app;

int main(int argc, char** argv) {
  CLI::App cli{"Boundary feedback synthesis and verification for the linearized Cahn-Hilliard system"};
  cli.set_version_flag("--version", "chstab 0.1.0");

  std::string config_path;
  std::string out_dir = "out";
  std::optional<std::uint64_t> seed;
  std::optional<int> k_modes;
  std::optional<std::string> convention;
  bool nonlinear = false;
  bool zero_gain = false;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", config_path, "Scenario INI file")->required()->check(CLI::ExistingFile);
    cmd->add_option("--out", out_dir, "Output root; runs go to <out>/<config hash>/");
    cmd->add_option("--seed", seed, "RNG seed (overrides [run] seed)");
    cmd->add_option("--k-modes", k_modes, "Number of Neumann modes K")->check(CLI::Range(2, 512));
    cmd->add_option("--convention", convention, "Feedback convention: shifted+, shifted-, scaled+ or scaled-");
  };

  auto* spectrum = cli.add_subcommand("spectrum", "Unstable eigenvalues and assumption checks");
  auto* synth = cli.add_subcommand("synth", "Synthesize the feedback law and certify the closed loop");
  auto* simulate = cli.add_subcommand("simulate", "Integrate the closed loop");
  auto* verify = cli.add_subcommand("verify", "Run the invariant battery");
  for (auto* cmd : {spectrum, synth, simulate, verify}) add_common(cmd);
  simulate->add_flag("--nonlinear", nonlinear, "Nonlinear loop (default: the mode in the config)");
  verify->add_flag("--zero-gain", zero_gain, "Replace the law by a zero-gain law");
  cli.require_subcommand(1);

  try {
    cli.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = cli.exit(e);
    return rc == 0 ? 0 : app::kConfigError;
  }

  app::ScenarioConfig config;
  try {
    config = app::load_config(config_path);
    if (spectrum->parsed()) config.mode = app::RunMode::spectrum;
    if (synth->parsed()) config.mode = app::RunMode::synth;
    if (verify->parsed()) config.mode = app::RunMode::verify;
    if (simulate->parsed()) {
      if (nonlinear) {
        config.mode = app::RunMode::simulate_nonlinear;
      } else if (config.mode != app::RunMode::simulate_nonlinear) {
        config.mode = app::RunMode::simulate_linear;
      }
    }
    if (seed) config.seed = *seed;
    if (k_modes) config.k = *k_modes;
    if (convention) config.convention = chstab::Convention::parse(*convention);
    if (zero_gain) config.zero_gain = true;
  } catch (const chstab::ConfigError& e) {
    return app::report_error(app::kConfigError, e.category(), e.what(), out_dir, std::cerr);
  }
  return app::run(config, out_dir, std::cout, std::cerr);
}
