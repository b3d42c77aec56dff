#include <CLI11.hpp>
#include <iostream>

#include "homog/errors.hpp"
#include "homog/pipeline.hpp"

int main(int argc, char** argv) {
  CLI::App app{"Periodic homogenization of a poroelastic medium: regimes, cell problems, macro runs, DNS checks"};
  app.require_subcommand(1);
  std::string config;
  homog::CliOptions cli;
  std::string out;
  double tol = 0.0;
  auto add_common = [&](CLI::App* sub) {
    sub->add_option("--config", config, "configuration file (INI sections)")->required();
    sub->add_option("--out", out, "output directory (overrides [output] dir)");
    sub->add_option("--workers", cli.workers, "worker threads for independent jobs")->check(CLI::PositiveNumber);
    sub->add_option("--tol", tol, "solver tolerance (overrides [numerics] tol)");
  };
  auto* regime = app.add_subcommand("regime", "print the regime and the required cell problems");
  auto* cell = app.add_subcommand("cell", "solve cell problems and write coefficients.json");
  auto* run = app.add_subcommand("run", "run the homogenized system and write time series and fields");
  auto* compare = app.add_subcommand("compare", "run the eps-problem sweep and compare with the macro run");
  for (auto* s : {regime, cell, run, compare}) add_common(s);

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    if (!out.empty()) cli.out = out;
    if (tol != 0.0) cli.tol = tol;
    const auto cfg = homog::apply_overrides(homog::load_config(config), cli);
    if (regime->parsed()) return homog::cmd_regime(cfg, std::cout);
    if (cell->parsed()) return homog::cmd_cell(cfg, cli, std::cout);
    if (run->parsed()) return homog::cmd_run(cfg, cli, std::cout);
    if (compare->parsed()) return homog::cmd_compare(cfg, cli, std::cout);
  } catch (const homog::Error& e) {
    std::cerr << "error: " << e.what() << "\n";
    return e.error_class() == homog::ErrorClass::Config ? 2 : 1;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return 1;
  }
  return 0;
}
