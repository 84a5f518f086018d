#include "cornerflow/geometry.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <utility>

namespace cornerflow {

namespace {

constexpr double kPi = std::numbers::pi;

// r-derivatives of g(log r) from ell-derivatives of g.
AngleJet jet_from_log_derivatives(double r, double g, double g1, double g2, double g3) {
  return {g, g1 / r, (g2 - g1) / (r * r), (g3 - 3.0 * g2 + 2.0 * g1) / (r * r * r)};
}

AngleJet negate(AngleJet j) { return {-j.value, -j.d1, -j.d2, -j.d3}; }

AngleJet shift(AngleJet j, double by) {
  j.value += by;
  return j;
}

}  // namespace

void check_opening_angle(double opening) {
  constexpr double tol = 1e-9;
  if (!(opening > tol && opening < 2.0 * kPi - tol) || std::abs(opening - kPi) < tol) {
    throw std::invalid_argument(
        "domain: opening angle " + std::to_string(opening) +
        " rad is excluded; the nonexistence setting requires Theta in (0, pi) or (pi, 2 pi), "
        "Theta not in {0, pi, 2 pi}");
  }
}

double CornerDomain::log_r_min() const { return std::log(spec_.r_min); }

CornerDomain CornerDomain::wedge(double opening, double r_min, double rotation) {
  check_opening_angle(opening);
  if (!(r_min > 0.0)) throw std::invalid_argument("domain: r_min must be positive");
  CornerDomain d;
  d.spec_.kind = "wedge";
  d.spec_.opening = opening;
  d.spec_.r_min = r_min;
  d.spec_.rotation = rotation;
  const double lo = rotation - 0.5 * opening;
  const double hi = rotation + 0.5 * opening;
  d.lower_ = [lo](double) { return AngleJet{lo, 0.0, 0.0, 0.0}; };
  d.upper_ = [hi](double) { return AngleJet{hi, 0.0, 0.0, 0.0}; };
  d.mid_angle_ = rotation;
  return d;
}

CornerDomain CornerDomain::half_plane(double r_min, double rotation) {
  if (!(r_min > 0.0)) throw std::invalid_argument("domain: r_min must be positive");
  CornerDomain d;
  d.spec_.kind = "half_plane";
  d.spec_.opening = kPi;
  d.spec_.r_min = r_min;
  d.spec_.rotation = rotation;
  const double lo = rotation - 0.5 * kPi;
  const double hi = rotation + 0.5 * kPi;
  d.lower_ = [lo](double) { return AngleJet{lo, 0.0, 0.0, 0.0}; };
  d.upper_ = [hi](double) { return AngleJet{hi, 0.0, 0.0, 0.0}; };
  d.mid_angle_ = rotation;
  d.excluded_ = true;
  return d;
}

CornerDomain CornerDomain::smoothed_wedge(double opening, double inner_opening, double r_min,
                                          double blend_scale, double blend_center,
                                          double rotation) {
  check_opening_angle(opening);
  if (!(r_min > 0.0)) throw std::invalid_argument("domain: r_min must be positive");
  if (!(blend_scale > 0.0)) throw std::invalid_argument("domain: blend_scale must be positive");
  if (!(inner_opening > 0.0 && inner_opening < 2.0 * kPi)) {
    throw std::invalid_argument("domain: inner_opening must lie in (0, 2 pi)");
  }
  CornerDomain d;
  d.spec_.kind = "smoothed_wedge";
  d.spec_.opening = opening;
  d.spec_.inner_opening = inner_opening;
  d.spec_.r_min = r_min;
  d.spec_.blend_scale = blend_scale;
  d.spec_.blend_center = blend_center;
  d.spec_.rotation = rotation;

  // Half opening g(ell) = (opening + (inner - opening) s(u)) / 2 with
  // s(u) = 1 / (1 + e^u), u = (ell - center) / scale.
  auto half = [=](double r) {
    const double u = (std::log(r) - blend_center) / blend_scale;
    double s, t;  // s and 1 - s
    if (u > 0.0) {
      const double e = std::exp(-u);
      s = e / (1.0 + e);
      t = 1.0 / (1.0 + e);
    } else {
      const double e = std::exp(u);
      s = 1.0 / (1.0 + e);
      t = e / (1.0 + e);
    }
    const double st = s * t;
    const double su = -st;
    const double suu = st * (1.0 - 2.0 * s);
    const double suuu = -st * (1.0 - 6.0 * s + 6.0 * s * s);
    const double a = 0.5 * (inner_opening - opening);
    const double w = blend_scale;
    return jet_from_log_derivatives(r, 0.5 * opening + a * s, a * su / w, a * suu / (w * w),
                                    a * suuu / (w * w * w));
  };
  d.lower_ = [=](double r) { return shift(negate(half(r)), rotation); };
  d.upper_ = [=](double r) { return shift(half(r), rotation); };
  d.mid_angle_ = rotation;
  return d;
}

CornerDomain CornerDomain::example() {
  CornerDomain d;
  d.spec_.kind = "example";
  d.spec_.opening = 1.5 * kPi;
  d.spec_.r_min = 1.0;
  d.spec_.rotation = 0.0;
  auto upper = [](double r) {
    const double a = std::pow(r, -2.0 / 3.0);
    const double b = 1.0 - a * a;
    const double g = 1.5 * std::acos(a);
    const double g1 = a / std::sqrt(b);
    const double g2 = -(2.0 / 3.0) * a / (b * std::sqrt(b));
    const double g3 = (4.0 / 9.0) * a * (1.0 + 2.0 * a * a) / (b * b * std::sqrt(b));
    return jet_from_log_derivatives(r, g, g1, g2, g3);
  };
  d.upper_ = upper;
  d.lower_ = [upper](double r) { return negate(upper(r)); };
  d.mid_angle_ = 0.0;
  return d;
}

CornerDomain CornerDomain::custom(std::string name, AngleFunction lower, AngleFunction upper,
                                  double r_min, double opening) {
  check_opening_angle(opening);
  if (!(r_min > 0.0)) throw std::invalid_argument("domain: r_min must be positive");
  CornerDomain d;
  d.spec_.kind = std::move(name);
  d.spec_.opening = opening;
  d.spec_.r_min = r_min;
  d.lower_ = std::move(lower);
  d.upper_ = std::move(upper);
  // Walls approach constants, so sampling far out fixes the branch.
  const double far = r_min * 1e8;
  d.mid_angle_ = 0.5 * (d.lower_(far).value + d.upper_(far).value);
  return d;
}

CornerDomain CornerDomain::from_spec(const DomainSpec& spec) {
  CornerDomain d;
  if (spec.kind == "wedge") {
    d = wedge(spec.opening, spec.r_min, spec.rotation);
  } else if (spec.kind == "smoothed_wedge") {
    d = smoothed_wedge(spec.opening, spec.inner_opening, spec.r_min, spec.blend_scale,
                       spec.blend_center, spec.rotation);
  } else if (spec.kind == "example") {
    d = example();
  } else if (spec.kind == "half_plane") {
    d = half_plane(spec.r_min, spec.rotation);
  } else {
    throw std::invalid_argument("domain: unknown kind '" + spec.kind +
                                "' (expected wedge, smoothed_wedge, example or half_plane)");
  }
  // Keep unused fields so that configurations round-trip verbatim.
  const DomainSpec built = d.spec_;
  d.spec_ = spec;
  d.spec_.opening = built.opening;
  d.spec_.r_min = built.r_min;
  if (spec.kind == "example") d.spec_.rotation = 0.0;
  return d;
}

WallAngles wall_angles(const CornerDomain& domain, double ell) {
  if (!(ell >= domain.log_r_min())) {
    throw std::domain_error("strip: ell = " + std::to_string(ell) +
                            " lies below the domain start log r_min = " +
                            std::to_string(domain.log_r_min()));
  }
  const double r = std::exp(ell);
  const AngleJet lo = domain.lower(r);
  const AngleJet hi = domain.upper(r);
  WallAngles w{};
  w.lo = lo.value;
  w.hi = hi.value;
  w.lo_l = r * lo.d1;
  w.hi_l = r * hi.d1;
  w.lo_ll = r * lo.d1 + r * r * lo.d2;
  w.hi_ll = r * hi.d1 + r * r * hi.d2;
  return w;
}

StripMapResult strip_map(const CornerDomain& domain, StripPoint p) {
  const WallAngles w = wall_angles(domain, p.ell);
  const double theta = p.lam * w.hi + (1.0 - p.lam) * w.lo;
  const double theta_l = p.lam * w.hi_l + (1.0 - p.lam) * w.lo_l;
  const double theta_lam = w.hi - w.lo;
  const double r = std::exp(p.ell);
  const double c = std::cos(theta);
  const double s = std::sin(theta);
  StripMapResult out;
  out.x = Vec2(r * c, r * s);
  // d x / d ell = x + r e_perp theta_l ; d x / d lam = r e_perp theta_lam
  out.jacobian(0, 0) = r * c - r * s * theta_l;
  out.jacobian(1, 0) = r * s + r * c * theta_l;
  out.jacobian(0, 1) = -r * s * theta_lam;
  out.jacobian(1, 1) = r * c * theta_lam;
  if (!out.jacobian.allFinite() || !(theta_lam > 0.0)) {
    throw std::domain_error("strip: degenerate map at ell = " + std::to_string(p.ell));
  }
  return out;
}

StripPoint strip_inverse(const CornerDomain& domain, const Vec2& x) {
  const double r = x.norm();
  const double ell = std::log(r);
  const double mid = domain.mid_angle();
  const double theta = mid + std::remainder(std::atan2(x.y(), x.x()) - mid, 2.0 * kPi);
  const WallAngles w = wall_angles(domain, ell);
  return {ell, (theta - w.lo) / (w.hi - w.lo)};
}

Mat2 log_polar_jacobian(const CornerDomain& domain, StripPoint p) {
  const WallAngles w = wall_angles(domain, p.ell);
  Mat2 j;
  j << 1.0, 0.0, p.lam * w.hi_l + (1.0 - p.lam) * w.lo_l, w.hi - w.lo;
  return j;
}

BoundaryFrame boundary_frame(const CornerDomain& domain, double ell, bool require_invertible) {
  const WallAngles w = wall_angles(domain, ell);
  auto tangent = [](double th, double th_l, double th_ll, Vec2& s, Vec2& ds) {
    const Vec2 e(std::cos(th), std::sin(th));
    const Vec2 ep(-std::sin(th), std::cos(th));
    s = e + th_l * ep;
    ds = (th_l + th_ll) * ep - th_l * th_l * e;
  };
  BoundaryFrame f;
  Vec2 ds0, ds1;
  tangent(w.lo, w.lo_l, w.lo_ll, f.s0, ds0);
  tangent(w.hi, w.hi_l, w.hi_ll, f.s1, ds1);
  f.B << f.s0.x(), f.s1.x(), -f.s0.y(), -f.s1.y();
  f.dB << ds0.x(), ds1.x(), -ds0.y(), -ds1.y();
  f.det = f.B.determinant();
  if (require_invertible && !(std::abs(f.det) >= 1e-12)) {
    throw std::domain_error(
        "boundary frame: det B = " + std::to_string(f.det) +
        " is numerically singular; the wall tangents are parallel (Theta near 0, pi or 2 pi)");
  }
  return f;
}

DecayReport verify_decay(const CornerDomain& domain, double eps, double bound,
                         std::span<const double> radii) {
  DecayReport rep;
  for (double r : radii) {
    if (!(r > domain.r_min())) {
      throw std::invalid_argument("verify_decay: sample radius must exceed r_min");
    }
    const AngleJet jets[2] = {domain.lower(r), domain.upper(r)};
    for (int wall = 0; wall < 2; ++wall) {
      const double d[3] = {jets[wall].d1, jets[wall].d2, jets[wall].d3};
      for (int k = 1; k <= 3; ++k) {
        const double ratio = std::abs(d[k - 1]) * std::pow(r, k + eps);
        if (ratio > rep.max_ratio || !std::isfinite(ratio)) {
          rep.max_ratio = ratio;
          rep.worst_order = k;
          rep.worst_wall = wall;
          rep.worst_radius = r;
        }
      }
    }
  }
  rep.pass = std::isfinite(rep.max_ratio) && rep.max_ratio <= bound;
  return rep;
}

double operator_norm(const Mat2& a) {
  const double fro2 = a.squaredNorm();
  const double det = a.determinant();
  const double disc = std::max(0.0, fro2 * fro2 - 4.0 * det * det);
  return std::sqrt(0.5 * (fro2 + std::sqrt(disc)));
}

QuasiconformalityReport quasiconformality_ratio(std::span<const Mat2> samples, double det_tol) {
  QuasiconformalityReport rep;
  rep.ratio.reserve(samples.size());
  rep.status.reserve(samples.size());
  for (const Mat2& f : samples) {
    const double n = operator_norm(f);
    const double n2 = n * n;
    const double det = f.determinant();
    if (n2 == 0.0 || std::abs(det) < det_tol * n2) {
      rep.ratio.push_back(std::numeric_limits<double>::quiet_NaN());
      rep.status.push_back(QcStatus::Degenerate);
      ++rep.degenerate;
    } else if (det < 0.0) {
      rep.ratio.push_back(std::numeric_limits<double>::quiet_NaN());
      rep.status.push_back(QcStatus::Reversed);
      ++rep.reversed;
    } else {
      const double ratio = n2 / det;
      rep.ratio.push_back(ratio);
      rep.status.push_back(QcStatus::Valid);
      ++rep.valid;
      if (rep.valid == 1 || ratio > rep.max_ratio) rep.max_ratio = ratio;
    }
  }
  return rep;
}

}  // namespace cornerflow
