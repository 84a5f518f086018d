// Field files, key/value reports and contour export.
#pragma once

#include <array>
#include <string>
#include <utility>
#include <vector>

#include "cornerflow/config.hpp"
#include "cornerflow/discretization.hpp"

namespace cornerflow {

/// One row per node, lam-major within ascending ell:
/// ell lam x y psi vx vy rho mach.
struct FieldFile {
  std::vector<std::pair<std::string, std::string>> header;
  DomainSpec domain;
  GasSpec gas;
  MeshSpec mesh;
  std::vector<std::array<double, 9>> rows;

  const std::string* find(const std::string& key) const;
  Eigen::VectorXd psi() const;
};

inline constexpr const char* kFieldFormat = "cornerflow-field 1";
inline constexpr const char* kReportFormat = "cornerflow-report 1";

/// Nodal rows for a solved field; velocities use recovered nodal gradients.
FieldFile make_field_file(const StripMesh& mesh, const FlowModel& model, const GasSpec& gas,
                          const Eigen::VectorXd& psi);

std::string format_field(const FieldFile& f);
/// Throws std::runtime_error on malformed input.
FieldFile parse_field(const std::string& text);
FieldFile read_field(const std::string& path);

using KeyValues = std::vector<std::pair<std::string, std::string>>;

std::string format_report(const KeyValues& kv);
KeyValues parse_report(const std::string& text);

/// Writes to path.tmp and renames, so a failed write leaves no partial file.
void write_file_atomic(const std::string& path, const std::string& contents);
std::string read_file(const std::string& path);

struct ContourPoint {
  double level;
  int polyline;
  double x, y;
};

/// Level-set polylines of the bilinear field by marching squares on the grid.
std::vector<ContourPoint> contour_polylines(const FieldFile& f, const std::vector<double>& levels);
std::string format_contours_csv(const std::vector<ContourPoint>& pts);

}  // namespace cornerflow
