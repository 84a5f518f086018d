#include <CLI11.hpp>

#include <iostream>
#include <string>
#include <vector>

#include "cornerflow/commands.hpp"

int main(int argc, char** argv) {
  using namespace cornerflow;
  CLI::App app{"Steady subsonic flow past a corner: solve, sweep, reference fields, diagnostics"};
  app.require_subcommand(1);

  std::string config, field, output, key;
  std::vector<double> values, levels;
  int count = 10;

  auto* solve = app.add_subcommand("solve", "Solve one configured case");
  solve->add_option("config", config, "Configuration file")->required();

  auto* sweep = app.add_subcommand("sweep", "Run a configured case over a list of values");
  sweep->add_option("config", config, "Configuration file")->required();
  sweep->add_option("--key", key, "L, amplitude or mesh")->required();
  sweep->add_option("--values", values, "Ascending values")->required()->delimiter(',');

  ReferenceOptions ref;
  auto* reference = app.add_subcommand("reference", "Write a closed-form field");
  reference->add_option("kind", ref.kind, "example, wedge-mode or vortex-sheet")->required();
  reference->add_option("-o,--output", ref.output, "Field file");
  reference->add_option("--ell-min", ref.ell_min);
  reference->add_option("--L", ref.ell_max);
  reference->add_option("--n-ell", ref.n_ell);
  reference->add_option("--n-lam", ref.n_lam);
  reference->add_option("--opening", ref.opening);
  reference->add_option("--k", ref.k);
  reference->add_option("--amplitude", ref.amplitude);
  reference->add_option("--vx", ref.vx);
  reference->add_option("--vy", ref.vy);

  auto* diagnose = app.add_subcommand("diagnose", "Recompute diagnostics from a field file");
  diagnose->add_option("field", field, "Field file")->required();
  diagnose->add_option("config", config, "Configuration with the diagnostics section")->required();
  diagnose->add_option("-o,--output", output, "Report file (default: configured report path)");

  std::string csv;
  auto* exp = app.add_subcommand("export", "Write stream-function contours");
  exp->add_option("field", field, "Field file")->required();
  exp->add_option("--csv", csv, "Output CSV")->required();
  exp->add_option("--levels", levels, "Contour levels")->delimiter(',');
  exp->add_option("--count", count, "Number of evenly spaced levels when --levels is absent");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int code = app.exit(e);
    return code == 0 ? 0 : kExitConfig;
  }

  if (*solve) return cmd_solve(config);
  if (*sweep) return cmd_sweep(config, key, values);
  if (*reference) return cmd_reference(ref);
  if (*diagnose) return cmd_diagnose(field, config, output);
  return cmd_export(field, csv, levels, count);
}
