// Physical flow quantities derived from psi, closed-form reference flows and
// weak-form checks for piecewise flows.
#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <optional>
#include <vector>

#include "cornerflow/discretization.hpp"
#include "cornerflow/gas.hpp"

namespace cornerflow {

/// Per-quadrature-point flow with momentum m = rho v = (psi_y, -psi_x).
struct FlowState {
  std::vector<Vec2> x;
  std::vector<StripPoint> strip;
  std::vector<double> weight;  // physical quadrature weight
  std::vector<Vec2> m;
  std::vector<Vec2> v;
  std::vector<double> rho;
  std::vector<double> q;
  std::vector<double> mach;
  std::vector<std::uint8_t> beyond_sonic;  // filled from the cutoff closure
  std::vector<double> vorticity;           // one entry per cell
};

FlowState reconstruct(const StripMesh& mesh, const FlowModel& model, const Eigen::VectorXd& psi);

struct ExactSample {
  double psi = 0.0;
  Vec2 v = Vec2::Zero();
};

/// psi = r^(2/3) cos(2 theta / 3) - 1 on {r^(2/3) cos(2 theta / 3) > 1, |theta| < 3 pi / 4}.
/// Throws std::domain_error outside the closure of that domain.
ExactSample exact_incompressible_example(const Vec2& x);
ReferenceField example_reference();

/// amplitude r^(k pi / Theta) sin(k pi (theta - theta0) / Theta).
ExactSample wedge_mode(const Vec2& x, double opening, double theta0, int k, double amplitude);
/// Hessian of the wedge mode stream function.
Mat2 wedge_mode_hessian(const Vec2& x, double opening, double theta0, int k, double amplitude);
ReferenceField wedge_mode_reference(double opening, double theta0, int k);

/// Density, velocity and pressure at a point.
struct FlowSample {
  double rho = 1.0;
  Vec2 v = Vec2::Zero();
  double p = 0.0;
};
using FlowSampler = std::function<FlowSample(const Vec2&)>;

/// Uniform flow v_inf on one side of a straight sheet from the corner and rest
/// on the other, with equal densities. The sheet continues the upper wall
/// through the corner, i.e. it points along theta_hi(inf) - pi.
class VortexSheetFlow {
 public:
  /// Throws std::invalid_argument unless v_inf is parallel to the sheet and
  /// std::domain_error if |v_inf| reaches the limit speed.
  VortexSheetFlow(const CornerDomain& domain, const Vec2& v_inf,
                  std::optional<GasModel> gas = std::nullopt);

  const Vec2& tangent() const { return tangent_; }
  const Vec2& normal() const { return normal_; }
  const Vec2& v_inf() const { return v_inf_; }
  double sheet_angle() const { return angle_; }
  double density() const { return rho_; }
  double pressure() const { return p_; }
  /// Strip coordinate of the sheet far from the corner.
  double sheet_lam() const { return sheet_lam_; }

  bool above(const Vec2& x) const { return x.dot(normal_) > 0.0; }
  FlowSample sample(const Vec2& x) const;
  double psi(const Vec2& x) const;
  FlowSampler sampler() const;
  /// Same flow with a different density (and pressure) below the sheet.
  FlowSampler sampler_with_density_below(double rho_below) const;

 private:
  Vec2 tangent_, normal_, v_inf_;
  double angle_ = 0.0;
  double rho_ = 1.0;
  double p_ = 1.0;
  double sheet_lam_ = 0.0;
  std::optional<GasModel> gas_;
};

/// Rectangle [s_min, s_max] x [-n_half, n_half] in the frame origin + s t + n n.
struct TestRegion {
  Vec2 origin = Vec2::Zero();
  Vec2 t = Vec2(1.0, 0.0);
  Vec2 n = Vec2(0.0, 1.0);
  double s_min = 1.0;
  double s_max = 3.0;
  double n_half = 1.0;
};

/// Region straddling the sheet at distance [2, 4] r_min from the corner.
TestRegion sheet_region(const VortexSheetFlow& sheet, double r_min);

struct WeakResidual {
  double mass = 0.0;      // max |int rho v . grad phi|
  double momentum = 0.0;  // max over components of |int (rho v v_k + p e_k) . grad phi|
  std::vector<double> mass_per_test;
  std::vector<Vec2> momentum_per_test;
};

/// Battery of 27 tensor bumps (3 scales x 9 positions). Each bump is
/// integrated with composite Gauss rules of `cells` cells per direction, split
/// at n = 0 so that jumps across the line n = 0 are integrated exactly.
WeakResidual weak_euler_residual(const FlowSampler& flow, const TestRegion& region, int cells = 8);

/// Velocity as seen from inside a cell; the cell index lets discontinuous
/// finite element fields return the cell's own trace.
using CellVelocity = std::function<Vec2(int cell, StripPoint p, const Vec2& x)>;

/// Circulation of v around each cell divided by the cell area. Arcs are split
/// at the given lam breakpoints.
std::vector<double> discrete_vorticity(const StripMesh& mesh, const CellVelocity& v,
                                       const std::vector<double>& lam_breaks = {});
/// Circulation around each cell.
std::vector<double> cell_circulation(const StripMesh& mesh, const CellVelocity& v,
                                     const std::vector<double>& lam_breaks = {});

/// Velocity of the finite element field inside a given cell.
CellVelocity finite_element_velocity(const StripMesh& mesh, const FlowModel& model,
                                     const Eigen::VectorXd& psi);

/// Circulation per unit length over cells whose lam range contains lam_sheet,
/// restricted to cells with ell in [ell_lo, ell_hi].
double sheet_line_density(const StripMesh& mesh, const VortexSheetFlow& sheet, double ell_lo,
                          double ell_hi);

}  // namespace cornerflow
