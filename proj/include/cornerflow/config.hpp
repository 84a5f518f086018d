// Experiment configuration: a sectioned key = value text format with scalar
// and [a, b, ...] array values.
#pragma once

#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "cornerflow/diagnostics.hpp"
#include "cornerflow/discretization.hpp"
#include "cornerflow/geometry.hpp"
#include "cornerflow/solver.hpp"

namespace cornerflow {

/// Invalid configuration; `key()` names the offending entry as section.key.
class ConfigError : public std::runtime_error {
 public:
  ConfigError(std::string key, const std::string& message)
      : std::runtime_error(key.empty() ? message : key + ": " + message), key_(std::move(key)) {}
  const std::string& key() const { return key_; }

 private:
  std::string key_;
};

struct GasSpec {
  bool compressible = false;
  double gamma = 1.4;
  double mach_cap = 0.8;

  bool operator==(const GasSpec&) const = default;
};

struct BcsSpec {
  std::string profile = "uniform_flux";  // uniform_flux | mode | exact
  double amplitude = 0.0;
  int k = 1;
  std::string reference = "example";  // exact profile: example | wedge_mode
  std::string inner = "dirichlet";    // dirichlet | natural

  bool operator==(const BcsSpec&) const = default;
};

struct OutputSpec {
  std::string field = "field.txt";
  std::string report = "report.txt";
  int workers = 1;

  bool operator==(const OutputSpec&) const = default;
};

struct ExperimentConfig {
  DomainSpec domain;
  GasSpec gas;
  MeshSpec mesh;
  bool ell_min_auto = true;  // ell_min = log r_min
  BcsSpec bcs;
  SolveConfig solve;
  std::vector<double> amplitudes;  // optional continuation ladder ending at bcs.amplitude
  DiagnosticsSpec diagnostics;
  OutputSpec output;

  bool operator==(const ExperimentConfig&) const = default;
};

/// Raw section -> key -> value text.
using IniDocument = std::map<std::string, std::map<std::string, std::string>>;

IniDocument parse_ini(const std::string& text);

/// Parses and validates; throws ConfigError.
ExperimentConfig parse_config(const std::string& text);
ExperimentConfig load_config(const std::string& path);
/// Lossless text form (17 significant digits).
std::string serialize_config(const ExperimentConfig& cfg);

/// Checks ranges and builds the domain once; throws ConfigError.
void validate_config(const ExperimentConfig& cfg);

/// Objects assembled from a configuration.
CornerDomain make_domain(const ExperimentConfig& cfg);
MeshSpec make_mesh_spec(const ExperimentConfig& cfg, const CornerDomain& domain);
BoundaryConditions make_bcs(const ExperimentConfig& cfg, const CornerDomain& domain);
FlowModel make_model(const ExperimentConfig& cfg);

/// Parses "1.5", "-2e-3", "pi", "1.5pi" or "3pi/2".
double parse_number(const std::string& text);

}  // namespace cornerflow
