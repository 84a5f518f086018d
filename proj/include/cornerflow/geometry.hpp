// Corner domains {r > r_min, theta_lo(r) < theta < theta_hi(r)}, their
// log-polar strip coordinates and the boundary-adapted tangent frame.
#pragma once

#include <Eigen/Core>
#include <Eigen/LU>

#include <cstdint>
#include <functional>
#include <numbers>
#include <span>
#include <string>
#include <vector>

namespace cornerflow {

using Vec2 = Eigen::Vector2d;
using Mat2 = Eigen::Matrix2d;

/// Boundary angle and its first three derivatives with respect to r.
struct AngleJet {
  double value = 0.0;
  double d1 = 0.0;
  double d2 = 0.0;
  double d3 = 0.0;
};

using AngleFunction = std::function<AngleJet(double r)>;

/// Serializable description of the built-in domain families.
struct DomainSpec {
  std::string kind = "wedge";  // wedge | smoothed_wedge | example | half_plane
  double opening = 1.5 * std::numbers::pi;
  double r_min = 1.0;
  double rotation = 0.0;
  // smoothed_wedge only: opening near the corner and the sigmoid blend in log r.
  double inner_opening = std::numbers::pi / 2.0;
  double blend_scale = 0.5;
  double blend_center = 1.0;

  bool operator==(const DomainSpec&) const = default;
};

class CornerDomain {
 public:
  /// Straight walls at rotation -/+ opening/2.
  static CornerDomain wedge(double opening, double r_min, double rotation = 0.0);
  /// Opening blends from inner_opening to opening with a logistic sigmoid in
  /// log r of width blend_scale; wall derivatives decay like r^(-k - 1/blend_scale).
  static CornerDomain smoothed_wedge(double opening, double inner_opening, double r_min,
                                     double blend_scale, double blend_center,
                                     double rotation = 0.0);
  /// The level set r^(2/3) cos(2 theta / 3) = 1: theta = -/+ (3/2) arccos(r^(-2/3)), r > 1.
  static CornerDomain example();
  /// Opening exactly pi. Not a valid corner; kept as the excluded comparison case.
  static CornerDomain half_plane(double r_min, double rotation = 0.0);
  static CornerDomain custom(std::string name, AngleFunction lower, AngleFunction upper,
                             double r_min, double opening);
  static CornerDomain from_spec(const DomainSpec& spec);

  AngleJet lower(double r) const { return lower_(r); }
  AngleJet upper(double r) const { return upper_(r); }
  double r_min() const { return spec_.r_min; }
  double log_r_min() const;
  /// Opening angle at infinity, theta_hi(inf) - theta_lo(inf).
  double opening() const { return spec_.opening; }
  const DomainSpec& spec() const { return spec_; }
  bool is_excluded_angle() const { return excluded_; }
  /// Angle halfway between the walls at infinity; used to pick the atan2 branch.
  double mid_angle() const { return mid_angle_; }

 private:
  CornerDomain() = default;
  DomainSpec spec_;
  AngleFunction lower_;
  AngleFunction upper_;
  double mid_angle_ = 0.0;
  bool excluded_ = false;
};

/// Throws std::invalid_argument if the opening angle is not in (0, pi) or (pi, 2pi).
void check_opening_angle(double opening);

struct StripPoint {
  double ell = 0.0;  // log r
  double lam = 0.0;  // 0 on the lower wall, 1 on the upper wall
};

/// Wall angles and their log-radius derivatives at one ell.
struct WallAngles {
  double lo, hi;          // theta_i
  double lo_l, hi_l;      // d theta_i / d ell
  double lo_ll, hi_ll;    // d^2 theta_i / d ell^2
};

WallAngles wall_angles(const CornerDomain& domain, double ell);

struct StripMapResult {
  Vec2 x;
  Mat2 jacobian;  // d x / d (ell, lam)
};

StripMapResult strip_map(const CornerDomain& domain, StripPoint p);
StripPoint strip_inverse(const CornerDomain& domain, const Vec2& x);
/// Jacobian of (ell, lam) -> (ell, theta).
Mat2 log_polar_jacobian(const CornerDomain& domain, StripPoint p);

struct BoundaryFrame {
  Vec2 s0, s1;  // tangents to the lam = 0 and lam = 1 walls, scaled by e^-ell
  Mat2 B;       // columns M s0, M s1 with M = diag(1, -1)
  Mat2 dB;      // d B / d ell
  double det = 0.0;
};

/// Throws std::domain_error when |det B| < 1e-12 unless require_invertible is
/// false; B itself stays well defined for parallel walls.
BoundaryFrame boundary_frame(const CornerDomain& domain, double ell, bool require_invertible = true);

struct DecayReport {
  bool pass = true;
  double max_ratio = 0.0;  // max |d^k theta_i| r^(k + eps) over the samples
  int worst_order = 0;
  int worst_wall = 0;
  double worst_radius = 0.0;
};

DecayReport verify_decay(const CornerDomain& domain, double eps, double bound,
                         std::span<const double> radii);

/// Largest singular value.
double operator_norm(const Mat2& a);

enum class QcStatus : std::uint8_t { Valid, Degenerate, Reversed };

struct QuasiconformalityReport {
  std::vector<double> ratio;  // |F|^2 / det F, NaN where not valid
  std::vector<QcStatus> status;
  double max_ratio = 1.0;
  std::size_t valid = 0;
  std::size_t degenerate = 0;
  std::size_t reversed = 0;
};

/// Points with |det F| < det_tol |F|^2 are flagged degenerate instead of divided.
QuasiconformalityReport quasiconformality_ratio(std::span<const Mat2> samples,
                                                double det_tol = 1e-12);

}  // namespace cornerflow
