// Bilinear finite elements on the truncated strip [ell_min, L] x [0, 1] with
// the exact strip-to-physical map evaluated at every quadrature point.
#pragma once

#include <Eigen/Core>
#include <Eigen/SparseCore>

#include <array>
#include <cstdint>
#include <functional>
#include <memory>
#include <span>
#include <string>
#include <vector>

#include "cornerflow/flow_model.hpp"
#include "cornerflow/geometry.hpp"

namespace cornerflow {

using SparseMatrix = Eigen::SparseMatrix<double>;

struct MeshSpec {
  double ell_min = 0.0;
  double ell_max = 4.0;
  int n_ell = 32;
  int n_lam = 16;
  int quad_order = 2;

  bool operator==(const MeshSpec&) const = default;
};

struct QuadPoint {
  StripPoint strip;
  Vec2 x;
  Mat2 jacobian;        // d x / d (ell, lam)
  Mat2 inv_jacobian_t;  // maps strip gradients to physical gradients
  double weight = 0.0;  // Gauss weight times cell size times |det jacobian|
  double strip_weight = 0.0;  // Gauss weight times cell size (strip measure)
  int cell = 0;
  int local = 0;  // index of the reference quadrature point
};

class StripMesh {
 public:
  /// Throws std::invalid_argument for inconsistent sizes and std::domain_error
  /// when ell_min lies below the start of the domain.
  static std::shared_ptr<const StripMesh> build(const CornerDomain& domain, const MeshSpec& spec);

  const CornerDomain& domain() const { return domain_; }
  const MeshSpec& spec() const { return spec_; }

  int n_ell() const { return spec_.n_ell; }
  int n_lam() const { return spec_.n_lam; }
  int node_count() const { return (spec_.n_ell + 1) * (spec_.n_lam + 1); }
  int cell_count() const { return spec_.n_ell * spec_.n_lam; }
  /// Nodes are numbered lam-major within ascending ell.
  int node(int i, int j) const { return i * (spec_.n_lam + 1) + j; }
  int node_i(int n) const { return n / (spec_.n_lam + 1); }
  int node_j(int n) const { return n % (spec_.n_lam + 1); }
  int cell(int i, int j) const { return i * spec_.n_lam + j; }
  /// Local order: (i, j), (i+1, j), (i, j+1), (i+1, j+1).
  std::array<int, 4> cell_nodes(int c) const;

  double h_ell() const { return h_ell_; }
  double h_lam() const { return h_lam_; }
  double ell(int i) const { return spec_.ell_min + i * h_ell_; }
  double lam(int j) const { return j * h_lam_; }

  const Vec2& node_x(int n) const { return node_x_[n]; }
  const Mat2& node_jacobian(int n) const { return node_jac_[n]; }

  int points_per_cell() const { return spec_.quad_order * spec_.quad_order; }
  std::span<const QuadPoint> quad_points() const { return qp_; }
  std::span<const QuadPoint> cell_quad_points(int c) const {
    return std::span<const QuadPoint>(qp_).subspan(static_cast<std::size_t>(c) * points_per_cell(),
                                                  points_per_cell());
  }
  /// Bilinear basis values and strip gradients at reference point `local`.
  const std::array<double, 4>& basis(int local) const { return basis_[local]; }
  const std::array<Vec2, 4>& basis_strip_gradient(int local) const { return grad_[local]; }

  /// Gauss rule on [0, 1].
  static void gauss_rule(int order, std::vector<double>& nodes, std::vector<double>& weights);

  /// CSC sparsity of the nodal coupling graph and, per cell, the value slot of
  /// each local (row, col) pair.
  const std::vector<int>& pattern_outer() const { return outer_; }
  const std::vector<int>& pattern_inner() const { return inner_; }
  const std::array<int, 16>& cell_slots(int c) const { return slots_[c]; }

 private:
  StripMesh(const CornerDomain& domain, const MeshSpec& spec);

  CornerDomain domain_;
  MeshSpec spec_;
  double h_ell_ = 0.0;
  double h_lam_ = 0.0;
  std::vector<Vec2> node_x_;
  std::vector<Mat2> node_jac_;
  std::vector<QuadPoint> qp_;
  std::vector<std::array<double, 4>> basis_;
  std::vector<std::array<Vec2, 4>> grad_;
  std::vector<int> outer_;
  std::vector<int> inner_;
  std::vector<std::array<int, 16>> slots_;
};

using MeshPtr = std::shared_ptr<const StripMesh>;

/// Nodal stream-function values on a mesh.
struct StreamField {
  MeshPtr mesh;
  Eigen::VectorXd psi;
};

/// A named closed-form stream function, used for exact boundary data.
struct ReferenceField {
  std::string name;
  std::function<double(const Vec2&)> psi;
};

class FarfieldProfile {
 public:
  enum class Kind { UniformFlux, Mode, Exact };

  /// Uniform mass flux m_inf next to both walls: psi = m_inf * A sin(pi lam) / pi,
  /// where A is the arc length of the cross-section. Vanishes on both walls and
  /// equals m_inf times the arc distance to the nearer wall to first order.
  static FarfieldProfile uniform_flux(double m_inf);
  /// amplitude * r^(k pi / Theta) * sin(k pi lam).
  static FarfieldProfile mode(int k, double amplitude);
  /// amplitude * reference.psi(x).
  static FarfieldProfile exact(ReferenceField reference, double amplitude = 1.0);

  Kind kind() const { return kind_; }
  double amplitude() const { return amplitude_; }
  int k() const { return k_; }
  const ReferenceField& reference() const { return reference_; }
  FarfieldProfile with_amplitude(double amplitude) const;

  double value(const CornerDomain& domain, StripPoint p) const;

 private:
  Kind kind_ = Kind::UniformFlux;
  double amplitude_ = 0.0;
  int k_ = 1;
  ReferenceField reference_;
};

enum class InnerBoundary { Dirichlet, Natural };

struct BoundaryConditions {
  FarfieldProfile profile = FarfieldProfile::uniform_flux(0.0);
  InnerBoundary inner = InnerBoundary::Dirichlet;
};

struct Constraints {
  std::vector<std::uint8_t> fixed;
  Eigen::VectorXd value;
  int free_count = 0;
};

/// psi = 0 on both walls, profile data on ell = L and, for Dirichlet inner
/// boundaries, on ell = ell_min. Throws std::invalid_argument if the profile
/// does not vanish at the wall endpoints.
Constraints apply_boundary_conditions(const StripMesh& mesh, const BoundaryConditions& bcs);

/// Overwrites the constrained entries of psi.
void impose(const Constraints& c, Eigen::VectorXd& psi);

/// Weak form sum_q w h(q) grad psi . grad phi_i. With constraints, rows of
/// fixed nodes hold psi_i - value_i instead.
Eigen::VectorXd assemble_residual(const StripMesh& mesh, const FlowModel& model,
                                  const Eigen::VectorXd& psi, const Constraints* c = nullptr);

/// Derivative of the unconstrained residual; with constraints, rows and
/// columns of fixed nodes are replaced by the identity.
SparseMatrix assemble_jacobian(const StripMesh& mesh, const FlowModel& model,
                               const Eigen::VectorXd& psi, const Constraints* c = nullptr);

/// sum_q w H(q), whose gradient is the unconstrained residual.
double discrete_energy(const StripMesh& mesh, const FlowModel& model, const Eigen::VectorXd& psi);

/// Physical gradient of the bilinear interpolant at every quadrature point.
std::vector<Vec2> quadrature_gradients(const StripMesh& mesh, const Eigen::VectorXd& psi);

/// Largest q = |grad psi|^2 / 2 over the quadrature points.
double max_momentum_flux(const StripMesh& mesh, const Eigen::VectorXd& psi);

/// Interpolates psi(x) at every node.
Eigen::VectorXd interpolate(const StripMesh& mesh, const std::function<double(const Vec2&)>& f);

/// Physical L2 norm of (psi_h - f) and of f, by the mesh quadrature.
struct L2Error {
  double error = 0.0;
  double norm = 0.0;
  double relative() const { return norm > 0.0 ? error / norm : error; }
};
L2Error l2_error(const StripMesh& mesh, const Eigen::VectorXd& psi,
                 const std::function<double(const Vec2&)>& f);

}  // namespace cornerflow
