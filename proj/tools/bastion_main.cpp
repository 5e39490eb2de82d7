// Command-line front end: run scenarios, compare run directories, validate
// trajectory files, and cross-check the learner against the scalar LQR
// closed form.
#include <CLI11.hpp>
#include <iostream>

#include "bastion/cli.hpp"
#include "bastion/config.hpp"

int main(int argc, char** argv) {
  CLI::App app{"bastion: safe adaptive optimal control with barrier states"};
  app.require_subcommand(1);

  bastion::RunOptions run_opts;
  double dt_override = 0.0, duration_override = 0.0;
  auto* run = app.add_subcommand("run", "simulate a scenario and write run artifacts");
  run->add_option("config", run_opts.config,
                  "config file path or bundled preset name")
      ->required();
  run->add_option("--out", run_opts.out_dir, "output directory (default runs/<name>)");
  auto* dt_opt = run->add_option("--dt", dt_override, "override the integration step");
  auto* dur_opt = run->add_option("--duration", duration_override, "override the horizon");

  std::string dir_a, dir_b;
  auto* compare = app.add_subcommand("compare", "compare two run directories");
  compare->add_option("dir_a", dir_a, "first run directory")->required();
  compare->add_option("dir_b", dir_b, "second run directory")->required();

  std::string csv_path;
  auto* check = app.add_subcommand("check", "validate a trajectory.csv file");
  check->add_option("csv", csv_path, "trajectory file")->required();

  std::string oracle_config;
  auto* oracle =
      app.add_subcommand("oracle-lqr", "learn on the scalar plant and compare to the "
                                       "closed-form Riccati solution");
  oracle->add_option("--config", oracle_config, "alternative scalar-linear config");

  bool list_presets = false;
  auto* presets = app.add_subcommand("presets", "list bundled preset names");
  (void)presets;
  (void)list_presets;

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 1;
  }

  if (run->parsed()) {
    if (dt_opt->count() > 0) run_opts.dt = dt_override;
    if (dur_opt->count() > 0) run_opts.duration = duration_override;
    return bastion::cmd_run(run_opts, std::cout, std::cerr);
  }
  if (compare->parsed()) return bastion::cmd_compare(dir_a, dir_b, std::cout, std::cerr);
  if (check->parsed()) return bastion::cmd_check(csv_path, std::cout, std::cerr);
  if (oracle->parsed()) return bastion::cmd_oracle(oracle_config, std::cout, std::cerr);
  if (presets->parsed()) {
    for (const auto& name : bastion::preset_names()) std::cout << name << "\n";
    return 0;
  }
  return 1;
}
