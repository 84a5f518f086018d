// Configuration-driven runs behind the command line tool.
#pragma once

#include <cmath>
#include <limits>
#include <numbers>
#include <optional>
#include <string>
#include <vector>

#include "cornerflow/config.hpp"
#include "cornerflow/io.hpp"

namespace cornerflow {

enum ExitCode : int {
  kExitCertified = 0,
  kExitConfig = 1,
  kExitCutoff = 2,
  kExitDiverged = 3,
};

/// Outcome of one configured solve, before anything is written.
struct CaseOutcome {
  int exit_code = kExitConfig;
  std::string status;  // certified | cutoff_active | mach_above_cap | diverged
  KeyValues report;
  std::optional<FieldFile> field;
  double max_mach = 0.0;
  double band_max = std::numeric_limits<double>::quiet_NaN();  // outermost retained band
  double band_extrapolated = std::numeric_limits<double>::quiet_NaN();
  double l2_relative = std::numeric_limits<double>::quiet_NaN();  // exact profiles only
};

/// build mesh -> boundary data -> solve -> reconstruct -> diagnostics.
/// Throws ConfigError for invalid configurations.
CaseOutcome run_case(const ExperimentConfig& cfg);

int cmd_solve(const std::string& config_path);

/// key is L, amplitude or mesh; mesh values set n_ell and scale n_lam with it.
int cmd_sweep(const std::string& config_path, const std::string& key,
              const std::vector<double>& values);

struct ReferenceOptions {
  std::string kind = "example";  // example | wedge-mode | vortex-sheet
  std::string output = "reference.txt";
  double ell_min = std::log(2.0);
  double ell_max = 4.0;
  int n_ell = 64;
  int n_lam = 64;
  double opening = 1.5 * std::numbers::pi;
  int k = 1;
  double amplitude = 1.0;
  double vx = 0.3;
  double vy = 0.0;
};

FieldFile reference_field(const ReferenceOptions& opt);
int cmd_reference(const ReferenceOptions& opt);

/// Recomputes diagnostics from a stored field; writes to `output` or to the
/// configured report path.
int cmd_diagnose(const std::string& field_path, const std::string& config_path,
                 const std::string& output = {});

/// `count` evenly spaced interior levels unless `levels` is given.
int cmd_export(const std::string& field_path, const std::string& csv_path,
               const std::vector<double>& levels, int count = 10);

/// Derived output paths for sweep case `index`: stem.key-index.ext.
std::string case_path(const std::string& base, const std::string& key, std::size_t index);
std::string summary_path(const std::string& report_base);

}  // namespace cornerflow
