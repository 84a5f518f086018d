#include "cornerflow/fields.hpp"

#include <boost/math/quadrature/gauss.hpp>

#include <algorithm>
#include <array>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cornerflow {

namespace {

constexpr double kPi = std::numbers::pi;
using Gauss8 = boost::math::quadrature::gauss<double, 8>;

Vec2 momentum_from_gradient(const Vec2& g) { return {g.y(), -g.x()}; }

double bump(double t) { return std::abs(t) < 1.0 ? std::exp(-1.0 / (1.0 - t * t)) : 0.0; }

double bump_prime(double t) {
  if (std::abs(t) >= 1.0) return 0.0;
  const double d = 1.0 - t * t;
  return bump(t) * (-2.0 * t / (d * d));
}

// Composite Gauss rule on [a, b] with `cells` pieces.
template <class F>
double composite(F&& f, double a, double b, int cells) {
  double sum = 0.0;
  const double h = (b - a) / cells;
  for (int k = 0; k < cells; ++k) sum += Gauss8::integrate(f, a + k * h, a + (k + 1) * h);
  return sum;
}

}  // namespace

FlowState reconstruct(const StripMesh& mesh, const FlowModel& model, const Eigen::VectorXd& psi) {
  const auto grads = quadrature_gradients(mesh, psi);
  const auto qps = mesh.quad_points();
  FlowState s;
  const std::size_t n = qps.size();
  s.x.resize(n);
  s.strip.resize(n);
  s.weight.resize(n);
  s.m.resize(n);
  s.v.resize(n);
  s.rho.resize(n);
  s.q.resize(n);
  s.mach.resize(n);
  s.beyond_sonic.assign(n, 0);
  for (std::size_t k = 0; k < n; ++k) {
    s.x[k] = qps[k].x;
    s.strip[k] = qps[k].strip;
    s.weight[k] = qps[k].weight;
    s.m[k] = momentum_from_gradient(grads[k]);
    const double q = 0.5 * grads[k].squaredNorm();
    s.q[k] = q;
    if (!model.is_compressible()) {
      s.rho[k] = 1.0;
      s.v[k] = s.m[k];
      s.mach[k] = 0.0;
      continue;
    }
    const GasModel& gas = model.gas();
    const double h = gas.h_cutoff(q);
    s.rho[k] = 1.0 / h;
    s.v[k] = h * s.m[k];
    s.mach[k] = s.v[k].norm() / gas.sound_speed(s.rho[k]);
    s.beyond_sonic[k] = q > gas.q_sonic();
  }
  s.vorticity = discrete_vorticity(mesh, finite_element_velocity(mesh, model, psi));
  return s;
}

ExactSample exact_incompressible_example(const Vec2& x) {
  const double r = x.norm();
  const double theta = std::atan2(x.y(), x.x());
  const double level = std::pow(r, 2.0 / 3.0) * std::cos(2.0 * theta / 3.0);
  if (!(std::abs(theta) <= 0.75 * kPi + 1e-12) || !(level >= 1.0 - 1e-9)) {
    throw std::domain_error("point (" + std::to_string(x.x()) + ", " + std::to_string(x.y()) +
                            ") lies outside the example domain");
  }
  const double c = 2.0 / 3.0 * std::pow(r, -1.0 / 3.0);
  return {level - 1.0, Vec2(c * std::sin(theta / 3.0), -c * std::cos(theta / 3.0))};
}

ReferenceField example_reference() {
  return {"example", [](const Vec2& x) { return exact_incompressible_example(x).psi; }};
}

namespace {

struct ModePolar {
  double r, theta, t, a;
};

ModePolar mode_polar(const Vec2& x, double opening, double theta0, int k) {
  const double r = x.norm();
  const double theta = std::atan2(x.y(), x.x());
  const double t = std::remainder(theta - theta0 - 0.5 * opening, 2.0 * kPi) + 0.5 * opening;
  return {r, theta0 + t, t, k * kPi / opening};
}

}  // namespace

ExactSample wedge_mode(const Vec2& x, double opening, double theta0, int k, double amplitude) {
  const auto p = mode_polar(x, opening, theta0, k);
  if (p.r == 0.0) return {0.0, Vec2::Zero()};
  const double psi = amplitude * std::pow(p.r, p.a) * std::sin(p.a * p.t);
  const double g = amplitude * p.a * std::pow(p.r, p.a - 1.0);
  const Vec2 grad(g * std::sin(p.a * p.t - p.theta), g * std::cos(p.a * p.t - p.theta));
  return {psi, momentum_from_gradient(grad)};
}

Mat2 wedge_mode_hessian(const Vec2& x, double opening, double theta0, int k, double amplitude) {
  const auto p = mode_polar(x, opening, theta0, k);
  const double c = amplitude * p.a * (p.a - 1.0) * std::pow(p.r, p.a - 2.0);
  const double phase = p.a * p.t - 2.0 * p.theta;
  const double re = c * std::cos(phase), im = c * std::sin(phase);
  Mat2 hess;
  hess << im, re, re, -im;
  return hess;
}

ReferenceField wedge_mode_reference(double opening, double theta0, int k) {
  return {"wedge_mode", [=](const Vec2& x) { return wedge_mode(x, opening, theta0, k, 1.0).psi; }};
}

VortexSheetFlow::VortexSheetFlow(const CornerDomain& domain, const Vec2& v_inf,
                                 std::optional<GasModel> gas)
    : v_inf_(v_inf), gas_(std::move(gas)) {
  const double opening = domain.opening();
  if (!(opening > kPi)) {
    throw std::invalid_argument("vortex sheet needs an opening angle above pi");
  }
  const double upper = domain.mid_angle() + 0.5 * opening;
  angle_ = upper - kPi;
  tangent_ = Vec2(std::cos(angle_), std::sin(angle_));
  normal_ = Vec2(-tangent_.y(), tangent_.x());
  sheet_lam_ = (opening - kPi) / opening;

  const double speed = v_inf.norm();
  if (std::abs(v_inf.dot(normal_)) > 1e-12 * std::max(1.0, speed)) {
    throw std::invalid_argument("v_inf must be tangent to the sheet");
  }
  if (gas_) {
    rho_ = gas_->density_from_speed(speed);
    if (!(rho_ > 0.0)) throw std::domain_error("v_inf reaches the limit speed");
    p_ = gas_->pressure(rho_);
  } else {
    rho_ = 1.0;
    p_ = 1.0;
  }
}

FlowSample VortexSheetFlow::sample(const Vec2& x) const {
  return {rho_, above(x) ? v_inf_ : Vec2::Zero().eval(), p_};
}

double VortexSheetFlow::psi(const Vec2& x) const {
  if (!above(x)) return 0.0;
  return rho_ * v_inf_.dot(tangent_) * x.dot(normal_);
}

FlowSampler VortexSheetFlow::sampler() const {
  return [self = *this](const Vec2& x) { return self.sample(x); };
}

FlowSampler VortexSheetFlow::sampler_with_density_below(double rho_below) const {
  const double p_below = gas_ ? gas_->pressure(rho_below) : p_ * rho_below / rho_;
  return [self = *this, rho_below, p_below](const Vec2& x) {
    if (self.above(x)) return self.sample(x);
    return FlowSample{rho_below, Vec2::Zero(), p_below};
  };
}

TestRegion sheet_region(const VortexSheetFlow& sheet, double r_min) {
  TestRegion r;
  r.origin = Vec2::Zero();
  r.t = sheet.tangent();
  r.n = sheet.normal();
  r.s_min = 2.0 * r_min;
  r.s_max = 4.0 * r_min;
  r.n_half = 0.5 * r_min;
  return r;
}

WeakResidual weak_euler_residual(const FlowSampler& flow, const TestRegion& region, int cells) {
  if (cells < 1) throw std::invalid_argument("weak residual needs at least one cell");
  WeakResidual out;
  const double half_s = 0.5 * (region.s_max - region.s_min);
  const double mid_s = 0.5 * (region.s_max + region.s_min);
  for (double scale : {1.0 / 2.0, 1.0 / 3.0, 1.0 / 4.0}) {
    const double as = scale * half_s, an = scale * region.n_half;
    for (int ps = -1; ps <= 1; ++ps) {
      for (int pn = -1; pn <= 1; ++pn) {
        const double cs = mid_s + ps * 0.5 * (half_s - as);
        const double cn = pn * 0.5 * (region.n_half - an);
        std::array<double, 3> acc{};  // mass, momentum x, momentum y
        auto integrand = [&](double s, double n, int which) {
          const double us = (s - cs) / as, un = (n - cn) / an;
          const double ds = bump_prime(us) * bump(un) / as;
          const double dn = bump(us) * bump_prime(un) / an;
          if (ds == 0.0 && dn == 0.0) return 0.0;
          const Vec2 grad = ds * region.t + dn * region.n;
          const auto f = flow(region.origin + s * region.t + n * region.n);
          const double flux = f.rho * f.v.dot(grad);
          if (which == 0) return flux;
          return which == 1 ? f.v.x() * flux + f.p * grad.x() : f.v.y() * flux + f.p * grad.y();
        };
        std::vector<std::pair<double, double>> n_pieces;
        const double n_lo = cn - an, n_hi = cn + an;
        if (n_lo < 0.0 && n_hi > 0.0) {
          n_pieces = {{n_lo, 0.0}, {0.0, n_hi}};
        } else {
          n_pieces = {{n_lo, n_hi}};
        }
        for (int which = 0; which < 3; ++which) {
          double total = 0.0;
          for (const auto& [a, b] : n_pieces) {
            total += composite(
                [&](double n) {
                  return composite([&](double s) { return integrand(s, n, which); }, cs - as,
                                   cs + as, cells);
                },
                a, b, cells);
          }
          acc[which] = total;
        }
        out.mass_per_test.push_back(acc[0]);
        out.momentum_per_test.emplace_back(acc[1], acc[2]);
        out.mass = std::max(out.mass, std::abs(acc[0]));
        out.momentum = std::max({out.momentum, std::abs(acc[1]), std::abs(acc[2])});
      }
    }
  }
  return out;
}

std::vector<double> cell_circulation(const StripMesh& mesh, const CellVelocity& v,
                                     const std::vector<double>& lam_breaks) {
  const auto& dom = mesh.domain();
  std::vector<double> circ(mesh.cell_count(), 0.0);
  for (int i = 0; i < mesh.n_ell(); ++i) {
    for (int j = 0; j < mesh.n_lam(); ++j) {
      const int c = mesh.cell(i, j);
      const double l0 = mesh.ell(i), l1 = mesh.ell(i + 1);
      const double m0 = mesh.lam(j), m1 = j + 1 == mesh.n_lam() ? 1.0 : mesh.lam(j + 1);
      // Along ell at fixed lam.
      auto along_ell = [&](double lam, double a, double b) {
        return Gauss8::integrate(
            [&](double ell) {
              const auto r = strip_map(dom, {ell, lam});
              return v(c, {ell, lam}, r.x).dot(r.jacobian.col(0));
            },
            a, b);
      };
      // Along lam at fixed ell, split at breakpoints inside (a, b).
      auto along_lam = [&](double ell, double a, double b) {
        std::vector<double> cuts{std::min(a, b)};
        for (double br : lam_breaks) {
          if (br > std::min(a, b) && br < std::max(a, b)) cuts.push_back(br);
        }
        cuts.push_back(std::max(a, b));
        double sum = 0.0;
        for (std::size_t k = 0; k + 1 < cuts.size(); ++k) {
          sum += Gauss8::integrate(
              [&](double lam) {
                const auto r = strip_map(dom, {ell, lam});
                return v(c, {ell, lam}, r.x).dot(r.jacobian.col(1));
              },
              cuts[k], cuts[k + 1]);
        }
        return a < b ? sum : -sum;
      };
      circ[c] = along_ell(m0, l0, l1) + along_lam(l1, m0, m1) - along_ell(m1, l0, l1) -
                along_lam(l0, m0, m1);
    }
  }
  return circ;
}

std::vector<double> discrete_vorticity(const StripMesh& mesh, const CellVelocity& v,
                                       const std::vector<double>& lam_breaks) {
  auto w = cell_circulation(mesh, v, lam_breaks);
  const auto& dom = mesh.domain();
  for (int i = 0; i < mesh.n_ell(); ++i) {
    for (int j = 0; j < mesh.n_lam(); ++j) {
      const double l0 = mesh.ell(i), l1 = mesh.ell(i + 1);
      const double m0 = mesh.lam(j), m1 = j + 1 == mesh.n_lam() ? 1.0 : mesh.lam(j + 1);
      const double area = Gauss8::integrate(
          [&](double ell) {
            return Gauss8::integrate(
                [&](double lam) { return strip_map(dom, {ell, lam}).jacobian.determinant(); }, m0,
                m1);
          },
          l0, l1);
      w[mesh.cell(i, j)] /= area;
    }
  }
  return w;
}

CellVelocity finite_element_velocity(const StripMesh& mesh, const FlowModel& model,
                                     const Eigen::VectorXd& psi) {
  return [&mesh, model, psi](int c, StripPoint p, const Vec2&) -> Vec2 {
    const int i = c / mesh.n_lam(), j = c % mesh.n_lam();
    const double xi = (p.ell - mesh.ell(i)) / mesh.h_ell();
    const double eta = (p.lam - mesh.lam(j)) / mesh.h_lam();
    const auto nodes = mesh.cell_nodes(c);
    const double he = mesh.h_ell(), hl = mesh.h_lam();
    const Vec2 g = psi[nodes[0]] * Vec2(-(1 - eta) / he, -(1 - xi) / hl) +
                   psi[nodes[1]] * Vec2((1 - eta) / he, -xi / hl) +
                   psi[nodes[2]] * Vec2(-eta / he, (1 - xi) / hl) +
                   psi[nodes[3]] * Vec2(eta / he, xi / hl);
    const Mat2 jac = strip_map(mesh.domain(), p).jacobian;
    const Vec2 grad = jac.transpose().partialPivLu().solve(g);
    const Vec2 m = momentum_from_gradient(grad);
    return model.h(0.5 * grad.squaredNorm()) * m;
  };
}

double sheet_line_density(const StripMesh& mesh, const VortexSheetFlow& sheet, double ell_lo,
                          double ell_hi) {
  const double lam_s = sheet.sheet_lam();
  const auto flow = sheet.sampler();
  const auto circ = cell_circulation(
      mesh, [&](int, StripPoint, const Vec2& x) { return flow(x).v; }, {lam_s});
  double total = 0.0, lo = 0.0, hi = 0.0;
  bool any = false;
  for (int i = 0; i < mesh.n_ell(); ++i) {
    const double l0 = mesh.ell(i), l1 = mesh.ell(i + 1);
    if (l0 < ell_lo - 1e-12 || l1 > ell_hi + 1e-12) continue;
    for (int j = 0; j < mesh.n_lam(); ++j) {
      const double m0 = mesh.lam(j), m1 = j + 1 == mesh.n_lam() ? 1.0 : mesh.lam(j + 1);
      if (lam_s > m0 && lam_s < m1) total += circ[mesh.cell(i, j)];
    }
    lo = any ? std::min(lo, l0) : l0;
    hi = any ? std::max(hi, l1) : l1;
    any = true;
  }
  if (!any) throw std::invalid_argument("no cells inside the requested ell range");
  return std::abs(total) / (std::exp(hi) - std::exp(lo));
}

}  // namespace cornerflow
