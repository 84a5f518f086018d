#include "cornerflow/discretization.hpp"

#include <algorithm>
#include <cmath>
#include <numbers>
#include <stdexcept>
#include <string>

namespace cornerflow {

namespace {

constexpr double kPi = std::numbers::pi;

void check_finite(const StripMesh& mesh, const Eigen::VectorXd& psi) {
  if (psi.size() != mesh.node_count()) {
    throw std::invalid_argument("psi has " + std::to_string(psi.size()) + " entries, mesh has " +
                                std::to_string(mesh.node_count()) + " nodes");
  }
  if (!psi.allFinite()) throw std::invalid_argument("psi contains non-finite values");
}

Vec2 qp_gradient(const StripMesh& mesh, const QuadPoint& qp, const std::array<int, 4>& nodes,
                 const Eigen::VectorXd& psi) {
  const auto& g = mesh.basis_strip_gradient(qp.local);
  Vec2 s = Vec2::Zero();
  for (int a = 0; a < 4; ++a) s += psi[nodes[a]] * g[a];
  return qp.inv_jacobian_t * s;
}

}  // namespace

void StripMesh::gauss_rule(int order, std::vector<double>& nodes, std::vector<double>& weights) {
  std::vector<double> x, w;
  switch (order) {
    case 2: {
      const double a = 1.0 / std::sqrt(3.0);
      x = {-a, a};
      w = {1.0, 1.0};
      break;
    }
    case 3: {
      const double a = std::sqrt(0.6);
      x = {-a, 0.0, a};
      w = {5.0 / 9.0, 8.0 / 9.0, 5.0 / 9.0};
      break;
    }
    case 4: {
      const double a = std::sqrt(3.0 / 7.0 - 2.0 / 7.0 * std::sqrt(1.2));
      const double b = std::sqrt(3.0 / 7.0 + 2.0 / 7.0 * std::sqrt(1.2));
      const double wa = (18.0 + std::sqrt(30.0)) / 36.0;
      const double wb = (18.0 - std::sqrt(30.0)) / 36.0;
      x = {-b, -a, a, b};
      w = {wb, wa, wa, wb};
      break;
    }
    default:
      throw std::invalid_argument("quad_order must be 2, 3 or 4, got " + std::to_string(order));
  }
  nodes.resize(x.size());
  weights.resize(x.size());
  for (std::size_t k = 0; k < x.size(); ++k) {
    nodes[k] = 0.5 * (x[k] + 1.0);
    weights[k] = 0.5 * w[k];
  }
}

std::array<int, 4> StripMesh::cell_nodes(int c) const {
  const int i = c / spec_.n_lam;
  const int j = c % spec_.n_lam;
  return {node(i, j), node(i + 1, j), node(i, j + 1), node(i + 1, j + 1)};
}

StripMesh::StripMesh(const CornerDomain& domain, const MeshSpec& spec)
    : domain_(domain), spec_(spec) {}

std::shared_ptr<const StripMesh> StripMesh::build(const CornerDomain& domain,
                                                  const MeshSpec& spec) {
  if (spec.n_ell < 2 || spec.n_lam < 2) {
    throw std::invalid_argument("mesh: n_ell and n_lam must be at least 2");
  }
  if (!(spec.ell_min < spec.ell_max) || !std::isfinite(spec.ell_max)) {
    throw std::invalid_argument("mesh: ell_min must be smaller than L");
  }
  if (spec.ell_min < domain.log_r_min()) {
    throw std::domain_error("mesh: ell_min = " + std::to_string(spec.ell_min) +
                            " lies below the domain start " + std::to_string(domain.log_r_min()));
  }
  std::vector<double> gx, gw;
  gauss_rule(spec.quad_order, gx, gw);

  std::shared_ptr<StripMesh> m(new StripMesh(domain, spec));
  m->h_ell_ = (spec.ell_max - spec.ell_min) / spec.n_ell;
  m->h_lam_ = 1.0 / spec.n_lam;

  const int nn = m->node_count();
  m->node_x_.resize(nn);
  m->node_jac_.resize(nn);
  for (int i = 0; i <= spec.n_ell; ++i) {
    const double ell = i == spec.n_ell ? spec.ell_max : m->ell(i);
    for (int j = 0; j <= spec.n_lam; ++j) {
      const double lam = j == spec.n_lam ? 1.0 : m->lam(j);
      const auto r = strip_map(domain, {ell, lam});
      m->node_x_[m->node(i, j)] = r.x;
      m->node_jac_[m->node(i, j)] = r.jacobian;
    }
  }

  // Reference element data; xi runs along ell, eta along lam.
  const int nq = spec.quad_order;
  for (int a = 0; a < nq; ++a) {
    for (int b = 0; b < nq; ++b) {
      const double xi = gx[a], eta = gx[b];
      m->basis_.push_back({(1 - xi) * (1 - eta), xi * (1 - eta), (1 - xi) * eta, xi * eta});
      const double he = m->h_ell_, hl = m->h_lam_;
      m->grad_.push_back({Vec2(-(1 - eta) / he, -(1 - xi) / hl), Vec2((1 - eta) / he, -xi / hl),
                          Vec2(-eta / he, (1 - xi) / hl), Vec2(eta / he, xi / hl)});
    }
  }

  const double cell_area = m->h_ell_ * m->h_lam_;
  m->qp_.reserve(static_cast<std::size_t>(m->cell_count()) * nq * nq);
  for (int i = 0; i < spec.n_ell; ++i) {
    for (int j = 0; j < spec.n_lam; ++j) {
      const int c = m->cell(i, j);
      int local = 0;
      for (int a = 0; a < nq; ++a) {
        for (int b = 0; b < nq; ++b, ++local) {
          QuadPoint qp;
          qp.strip = {m->ell(i) + gx[a] * m->h_ell_, m->lam(j) + gx[b] * m->h_lam_};
          const auto r = strip_map(domain, qp.strip);
          const double det = r.jacobian.determinant();
          if (!(std::abs(det) > 0.0)) throw std::domain_error("mesh: singular strip map");
          qp.x = r.x;
          qp.jacobian = r.jacobian;
          qp.inv_jacobian_t = r.jacobian.inverse().transpose();
          qp.strip_weight = gw[a] * gw[b] * cell_area;
          qp.weight = qp.strip_weight * std::abs(det);
          qp.cell = c;
          qp.local = local;
          m->qp_.push_back(qp);
        }
      }
    }
  }

  // Nodal coupling graph: each node couples to its 3x3 neighbourhood.
  m->outer_.assign(nn + 1, 0);
  for (int n = 0; n < nn; ++n) {
    const int i = m->node_i(n), j = m->node_j(n);
    for (int di = -1; di <= 1; ++di) {
      for (int dj = -1; dj <= 1; ++dj) {
        const int ii = i + di, jj = j + dj;
        if (ii < 0 || ii > spec.n_ell || jj < 0 || jj > spec.n_lam) continue;
        m->inner_.push_back(m->node(ii, jj));
      }
    }
    m->outer_[n + 1] = static_cast<int>(m->inner_.size());
  }
  m->slots_.resize(m->cell_count());
  for (int c = 0; c < m->cell_count(); ++c) {
    const auto nodes = m->cell_nodes(c);
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        const int col = nodes[b];
        const auto first = m->inner_.begin() + m->outer_[col];
        const auto last = m->inner_.begin() + m->outer_[col + 1];
        m->slots_[c][a * 4 + b] = static_cast<int>(std::lower_bound(first, last, nodes[a]) -
                                                   m->inner_.begin());
      }
    }
  }
  return m;
}

FarfieldProfile FarfieldProfile::uniform_flux(double m_inf) {
  FarfieldProfile p;
  p.kind_ = Kind::UniformFlux;
  p.amplitude_ = m_inf;
  return p;
}

FarfieldProfile FarfieldProfile::mode(int k, double amplitude) {
  if (k < 1) throw std::invalid_argument("mode index k must be at least 1");
  FarfieldProfile p;
  p.kind_ = Kind::Mode;
  p.k_ = k;
  p.amplitude_ = amplitude;
  return p;
}

FarfieldProfile FarfieldProfile::exact(ReferenceField reference, double amplitude) {
  if (!reference.psi) throw std::invalid_argument("exact profile needs a reference field");
  FarfieldProfile p;
  p.kind_ = Kind::Exact;
  p.reference_ = std::move(reference);
  p.amplitude_ = amplitude;
  return p;
}

FarfieldProfile FarfieldProfile::with_amplitude(double amplitude) const {
  FarfieldProfile p = *this;
  p.amplitude_ = amplitude;
  return p;
}

double FarfieldProfile::value(const CornerDomain& domain, StripPoint p) const {
  switch (kind_) {
    case Kind::UniformFlux: {
      const auto w = wall_angles(domain, p.ell);
      const double arc = std::exp(p.ell) * (w.hi - w.lo);
      return amplitude_ * arc * std::sin(kPi * p.lam) / kPi;
    }
    case Kind::Mode: {
      const double exponent = k_ * kPi / domain.opening();
      return amplitude_ * std::exp(exponent * p.ell) * std::sin(k_ * kPi * p.lam);
    }
    case Kind::Exact:
      return amplitude_ * reference_.psi(strip_map(domain, p).x);
  }
  return 0.0;
}

Constraints apply_boundary_conditions(const StripMesh& mesh, const BoundaryConditions& bcs) {
  const auto& dom = mesh.domain();
  const double l0 = mesh.spec().ell_min, l1 = mesh.spec().ell_max;

  double scale = 0.0;
  for (int j = 0; j <= mesh.n_lam(); ++j) {
    const double lam = j == mesh.n_lam() ? 1.0 : mesh.lam(j);
    scale = std::max(scale, std::abs(bcs.profile.value(dom, {l1, lam})));
  }
  const double tol = 1e-9 * std::max(1.0, scale);
  for (double ell : {l0, l1}) {
    for (double lam : {0.0, 1.0}) {
      const double v = bcs.profile.value(dom, {ell, lam});
      if (!(std::abs(v) <= tol)) {
        throw std::invalid_argument("far-field profile is " + std::to_string(v) +
                                    " at a wall endpoint (ell = " + std::to_string(ell) +
                                    ", lam = " + std::to_string(lam) + "); it must vanish there");
      }
    }
  }

  Constraints c;
  const int nn = mesh.node_count();
  c.fixed.assign(nn, 0);
  c.value = Eigen::VectorXd::Zero(nn);
  for (int i = 0; i <= mesh.n_ell(); ++i) {
    c.fixed[mesh.node(i, 0)] = 1;
    c.fixed[mesh.node(i, mesh.n_lam())] = 1;
  }
  auto fix_line = [&](int i, double ell) {
    for (int j = 1; j < mesh.n_lam(); ++j) {
      const int n = mesh.node(i, j);
      c.fixed[n] = 1;
      c.value[n] = bcs.profile.value(dom, {ell, mesh.lam(j)});
    }
  };
  fix_line(mesh.n_ell(), l1);
  if (bcs.inner == InnerBoundary::Dirichlet) fix_line(0, l0);
  c.free_count = static_cast<int>(std::count(c.fixed.begin(), c.fixed.end(), 0));
  return c;
}

void impose(const Constraints& c, Eigen::VectorXd& psi) {
  for (Eigen::Index n = 0; n < psi.size(); ++n) {
    if (c.fixed[n]) psi[n] = c.value[n];
  }
}

Eigen::VectorXd assemble_residual(const StripMesh& mesh, const FlowModel& model,
                                  const Eigen::VectorXd& psi, const Constraints* c) {
  check_finite(mesh, psi);
  Eigen::VectorXd r = Eigen::VectorXd::Zero(mesh.node_count());
  for (int cell = 0; cell < mesh.cell_count(); ++cell) {
    const auto nodes = mesh.cell_nodes(cell);
    for (const auto& qp : mesh.cell_quad_points(cell)) {
      const Vec2 grad = qp_gradient(mesh, qp, nodes, psi);
      const double h = model.h(0.5 * grad.squaredNorm());
      const Vec2 flux = qp.inv_jacobian_t.transpose() * (qp.weight * h * grad);
      const auto& g = mesh.basis_strip_gradient(qp.local);
      for (int a = 0; a < 4; ++a) r[nodes[a]] += g[a].dot(flux);
    }
  }
  if (c) {
    for (int n = 0; n < mesh.node_count(); ++n) {
      if (c->fixed[n]) r[n] = psi[n] - c->value[n];
    }
  }
  return r;
}

SparseMatrix assemble_jacobian(const StripMesh& mesh, const FlowModel& model,
                               const Eigen::VectorXd& psi, const Constraints* c) {
  check_finite(mesh, psi);
  const int nn = mesh.node_count();
  const auto& outer = mesh.pattern_outer();
  const auto& inner = mesh.pattern_inner();
  std::vector<double> values(inner.size(), 0.0);

  for (int cell = 0; cell < mesh.cell_count(); ++cell) {
    const auto nodes = mesh.cell_nodes(cell);
    const auto& slots = mesh.cell_slots(cell);
    double ke[4][4] = {};
    for (const auto& qp : mesh.cell_quad_points(cell)) {
      const Vec2 grad = qp_gradient(mesh, qp, nodes, psi);
      const double q = 0.5 * grad.squaredNorm();
      const Mat2 coeff = qp.weight * (model.h(q) * Mat2::Identity() +
                                      model.h_prime(q) * grad * grad.transpose());
      const auto& g = mesh.basis_strip_gradient(qp.local);
      std::array<Vec2, 4> phys;
      for (int a = 0; a < 4; ++a) phys[a] = qp.inv_jacobian_t * g[a];
      for (int a = 0; a < 4; ++a) {
        const Vec2 ka = coeff * phys[a];
        for (int b = a; b < 4; ++b) ke[a][b] += phys[b].dot(ka);
      }
    }
    for (int a = 0; a < 4; ++a) {
      for (int b = 0; b < 4; ++b) {
        values[slots[a * 4 + b]] += a <= b ? ke[a][b] : ke[b][a];
      }
    }
  }

  if (c) {
    for (int col = 0; col < nn; ++col) {
      for (int k = outer[col]; k < outer[col + 1]; ++k) {
        const int row = inner[k];
        if (c->fixed[row] || c->fixed[col]) values[k] = row == col ? 1.0 : 0.0;
      }
    }
  }

  SparseMatrix K(nn, nn);
  K.resizeNonZeros(static_cast<Eigen::Index>(inner.size()));
  std::copy(outer.begin(), outer.end(), K.outerIndexPtr());
  std::copy(inner.begin(), inner.end(), K.innerIndexPtr());
  std::copy(values.begin(), values.end(), K.valuePtr());
  return K;
}

double discrete_energy(const StripMesh& mesh, const FlowModel& model,
                       const Eigen::VectorXd& psi) {
  check_finite(mesh, psi);
  double e = 0.0;
  for (int cell = 0; cell < mesh.cell_count(); ++cell) {
    const auto nodes = mesh.cell_nodes(cell);
    for (const auto& qp : mesh.cell_quad_points(cell)) {
      const Vec2 grad = qp_gradient(mesh, qp, nodes, psi);
      e += qp.weight * model.energy_density(0.5 * grad.squaredNorm());
    }
  }
  return e;
}

std::vector<Vec2> quadrature_gradients(const StripMesh& mesh, const Eigen::VectorXd& psi) {
  check_finite(mesh, psi);
  std::vector<Vec2> out;
  out.reserve(mesh.quad_points().size());
  for (int cell = 0; cell < mesh.cell_count(); ++cell) {
    const auto nodes = mesh.cell_nodes(cell);
    for (const auto& qp : mesh.cell_quad_points(cell)) {
      out.push_back(qp_gradient(mesh, qp, nodes, psi));
    }
  }
  return out;
}

double max_momentum_flux(const StripMesh& mesh, const Eigen::VectorXd& psi) {
  double q = 0.0;
  for (const auto& g : quadrature_gradients(mesh, psi)) q = std::max(q, 0.5 * g.squaredNorm());
  return q;
}

Eigen::VectorXd interpolate(const StripMesh& mesh, const std::function<double(const Vec2&)>& f) {
  Eigen::VectorXd v(mesh.node_count());
  for (int n = 0; n < mesh.node_count(); ++n) v[n] = f(mesh.node_x(n));
  return v;
}

L2Error l2_error(const StripMesh& mesh, const Eigen::VectorXd& psi,
                 const std::function<double(const Vec2&)>& f) {
  check_finite(mesh, psi);
  double err = 0.0, norm = 0.0;
  for (int cell = 0; cell < mesh.cell_count(); ++cell) {
    const auto nodes = mesh.cell_nodes(cell);
    for (const auto& qp : mesh.cell_quad_points(cell)) {
      const auto& phi = mesh.basis(qp.local);
      double uh = 0.0;
      for (int a = 0; a < 4; ++a) uh += phi[a] * psi[nodes[a]];
      const double u = f(qp.x);
      err += qp.weight * (uh - u) * (uh - u);
      norm += qp.weight * u * u;
    }
  }
  return {std::sqrt(err), std::sqrt(norm)};
}

}  // namespace cornerflow
