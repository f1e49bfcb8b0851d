/**
 * @file scop.cpp
 * @brief Command-line driver: scop <command> --config FILE [options].
 */

#include <fstream>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include "CLI11.hpp"

#include "scop/cli.hpp"

int main(int argc, char** argv) {
  namespace cli = scop::cli;

  CLI::App app{"Recurrence coefficients and deformation flows for generalized Jacobi weights"};
  std::string command, config_path, output_path;
  cli::Overrides over;
  int n = -1;
  double t0 = 0.0, t1 = 0.0, rtol = 0.0;
  bool strict = false;

  app.add_option("command", command, "coeffs | ladder | evolve | moments | verify | selftest")
      ->required()
      ->check(CLI::IsMember(cli::commands()));
  app.add_option("--config", config_path, "JSON run configuration")->required()->check(CLI::ExistingFile);
  app.add_option("--output", output_path, "CSV destination (default: stdout)");
  auto* n_opt = app.add_option("--n", n, "polynomial degree");
  auto* t0_opt = app.add_option("--t0", t0, "start time");
  auto* t1_opt = app.add_option("--t1", t1, "end time");
  auto* rtol_opt = app.add_option("--rtol", rtol, "integrator relative tolerance");
  app.add_flag("--selfcheck", over.selfcheck, "compare quadrature at npts and 2*npts");
  app.add_flag("--strict", strict, "reject unknown configuration keys");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : cli::exit_config;
  }
  if (*n_opt) over.n = n;
  if (*t0_opt) over.t0 = t0;
  if (*t1_opt) over.t1 = t1;
  if (*rtol_opt) over.rtol = rtol;

  std::ifstream in(config_path);
  std::stringstream text;
  text << in.rdbuf();

  cli::RunConfig cfg;
  try {
    std::vector<std::string> warnings;
    cfg = cli::parse_config(text.str(), strict, &warnings);
    for (const auto& w : warnings) std::cerr << "warning: " << w << '\n';
    cfg = cli::apply_overrides(cfg, over);
  } catch (const scop::error& e) {
    std::cerr << "error: " << e.what() << '\n';
    return cli::exit_config;
  }

  if (output_path.empty()) return cli::run_command(command, cfg, std::cout, std::cerr);
  std::ofstream out(output_path);
  if (!out) {
    std::cerr << "error: cannot open " << output_path << '\n';
    return cli::exit_config;
  }
  return cli::run_command(command, cfg, out, std::cerr);
}
