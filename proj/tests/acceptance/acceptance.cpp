// Acceptance suite: one PASS/FAIL line per criterion.
//
//   acceptance [--only A1,A5] [--expect-fail A2]
//
// The exit status counts failures not listed under --expect-fail.

#include <Eigen/SparseCholesky>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <numbers>
#include <random>
#include <set>
#include <sstream>
#include <string>
#include <vector>

#include "cornerflow/commands.hpp"
#include "cornerflow/diagnostics.hpp"
#include "cornerflow/fields.hpp"
#include "cornerflow/solver.hpp"

using namespace cornerflow;

namespace {

constexpr double kPi = std::numbers::pi;

struct Outcome {
  bool pass = false;
  std::string detail;
};

std::string fmt(const char* f, auto... args) {
  char buf[512];
  std::snprintf(buf, sizeof buf, f, args...);
  return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
  return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

double slope_order(const std::vector<double>& n, const std::vector<double>& err) {
  double sx = 0, sy = 0, sxx = 0, sxy = 0;
  const double m = static_cast<double>(n.size());
  for (std::size_t k = 0; k < n.size(); ++k) {
    const double x = -std::log(n[k]), y = std::log(err[k]);
    sx += x;
    sy += y;
    sxx += x * x;
    sxy += x * y;
  }
  return (m * sxy - sx * sy) / (m * sxx - sx * sx);
}

// ---------------------------------------------------------------- shared runs

ExperimentConfig wedge_config(double L, bool compressible) {
  ExperimentConfig c;
  c.domain.kind = "wedge";
  c.domain.opening = 1.5 * kPi;
  c.domain.r_min = 1.0;
  c.gas.compressible = compressible;
  c.gas.gamma = 1.4;
  c.gas.mach_cap = 0.8;
  c.mesh.ell_max = L;
  c.mesh.n_ell = static_cast<int>(16 * L);
  c.mesh.n_lam = 32;
  c.bcs.profile = "uniform_flux";
  c.bcs.amplitude = 0.01;
  return c;
}

struct FarRun {
  double L = 0.0;
  ExperimentConfig cfg;
  MeshPtr mesh;
  SolveResult result;
  FlowState flow;
  double band_max = 0.0;  // band [L - 2, L - 1]
};

FarRun farfield_run(double L, bool compressible, int refine = 1) {
  FarRun r;
  r.L = L;
  r.cfg = wedge_config(L, compressible);
  r.cfg.mesh.n_ell *= refine;
  r.cfg.mesh.n_lam *= refine;
  const CornerDomain domain = make_domain(r.cfg);
  r.mesh = StripMesh::build(domain, make_mesh_spec(r.cfg, domain));
  const BoundaryConditions bcs = make_bcs(r.cfg, domain);
  const FlowModel model = make_model(r.cfg);
  r.result = compressible ? solve_compressible(r.mesh, model.gas(), bcs)
                          : solve_incompressible(r.mesh, bcs);
  r.flow = reconstruct(*r.mesh, model, r.result.field.psi);
  const Band band{L - 2.0, L - 1.0};
  const FarfieldReport far = farfield_velocity(*r.mesh, r.flow, std::span(&band, 1), 1.0, 1e-2);
  r.band_max = far.bands.at(0).max_speed;
  return r;
}

std::vector<FarRun>& compressible_runs() {
  static std::vector<FarRun> runs = [] {
    std::vector<FarRun> v;
    for (double L : {4.0, 6.0, 8.0}) v.push_back(farfield_run(L, true));
    return v;
  }();
  return runs;
}

// ------------------------------------------------------------------ criteria

Outcome a1() {
  const auto t0 = std::chrono::steady_clock::now();
  const CornerDomain domain = CornerDomain::example();
  const ReferenceField ref = example_reference();
  BoundaryConditions bcs;
  bcs.profile = FarfieldProfile::exact(ref);
  std::vector<double> n, err;
  for (int k : {32, 64, 128}) {
    const MeshPtr mesh = StripMesh::build(domain, {std::log(2.0), 6.0, k, k / 2, 2});
    const SolveResult res = solve_incompressible(mesh, bcs);
    n.push_back(k);
    err.push_back(l2_error(*mesh, res.field.psi, ref.psi).relative());
  }
  const double order = slope_order(n, err);
  const double secs = seconds_since(t0);
  Outcome o;
  o.pass = err.back() <= 1e-3 && order >= 1.8 && secs <= 60.0;
  o.detail = fmt("relative L2 %.3e %.3e %.3e, order %.3f, %.1f s (need <= 1e-3, >= 1.8, <= 60 s)",
                 err[0], err[1], err[2], order, secs);
  return o;
}

Outcome a2() {
  const auto t0 = std::chrono::steady_clock::now();
  auto judge = [](const std::vector<double>& v, std::string& text) {
    bool decreasing = true;
    for (std::size_t k = 1; k < v.size(); ++k) decreasing = decreasing && v[k] < v[k - 1];
    const double limit = extrapolate_limit(v);
    text += fmt("band max %.6g %.6g %.6g, limit %.6g = %.3f x L=4 value, %s", v[0], v[1], v[2],
                limit, limit / v[0], decreasing ? "decreasing" : "not decreasing");
    return decreasing && limit <= 0.25 * v[0];
  };
  std::vector<double> comp, inc;
  for (const auto& r : compressible_runs()) comp.push_back(r.band_max);
  for (double L : {4.0, 6.0, 8.0}) inc.push_back(farfield_run(L, false).band_max);
  std::string text = "compressible: ";
  const bool ok_c = judge(comp, text);
  text += "; incompressible: ";
  const bool ok_i = judge(inc, text);
  const double secs = seconds_since(t0);
  text += fmt("; %.1f s (need decreasing, limit <= 0.25 x, <= 600 s)", secs);
  return {ok_c && ok_i && secs <= 600.0, text};
}

Outcome a3() {
  std::string text;
  bool ok = true;
  for (bool compressible : {false, true}) {
    ExperimentConfig c;
    c.domain.kind = "half_plane";
    c.domain.r_min = 1.0;
    c.gas.compressible = compressible;
    c.mesh.ell_max = 6.0;
    c.mesh.n_ell = 96;
    c.mesh.n_lam = 32;
    c.bcs.profile = "uniform_flux";
    c.bcs.amplitude = 0.3;
    const CaseOutcome out = run_case(c);
    double lo = INFINITY, hi = 0.0;
    int bands = 0;
    for (const auto& [k, v] : out.report) {
      if (k.starts_with("farfield.band.") && k.ends_with(".max_speed")) {
        lo = std::min(lo, std::stod(v));
        hi = std::max(hi, std::stod(v));
        ++bands;
      }
    }
    const double spread = hi / lo - 1.0;
    ok = ok && out.exit_code == kExitCertified && bands >= 3 && spread <= 0.01;
    text += fmt("%s%s: %d bands, max |v| in [%.6f, %.6f], spread %.2e", text.empty() ? "" : "; ",
                compressible ? "compressible" : "incompressible", bands, lo, hi, spread);
  }
  text += " (need spread <= 1e-2)";
  return {ok, text};
}

Outcome a4() {
  bool ok = true;
  std::string text;
  const GasModel g2(2.0, 0.8);
  const double qs_err = std::abs(g2.q_sonic() - 4.0 / 27.0);
  ok = ok && qs_err <= 1e-12;
  text += fmt("q_sonic(2) error %.1e", qs_err);

  std::mt19937_64 rng(7);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  double trip = 0.0, deriv = 0.0, c1 = 0.0, min_eig = INFINITY;
  for (double gamma : {1.4, 5.0 / 3.0, 2.0}) {
    const GasModel g(gamma, 0.8);
    for (int k = 0; k < 1000; ++k) {
      const double rho = g.sonic_density() + (1.0 - g.sonic_density()) * u(rng);
      const double pi1 = 1.0 / (gamma - 1.0), pir = std::pow(rho, gamma - 1.0) / (gamma - 1.0);
      const double q = rho * rho * (pi1 - pir);
      trip = std::max(trip, std::abs(g.h(q) * rho - 1.0));
      const double qd = (1e-3 + 0.979 * u(rng)) * g.q_sonic();
      const double d = 1e-5 * g.q_sonic();
      const double fd = (g.h(qd + d) - g.h(qd - d)) / (2.0 * d);
      deriv = std::max(deriv, std::abs(fd - g.h_prime(qd)) / std::abs(g.h_prime(qd)));
      const auto e = g.ellipticity_eigenvalues(10.0 * g.q_bar() * u(rng));
      min_eig = std::min({min_eig, e.tangential, e.streamwise});
    }
    const double qb = g.q_bar();
    const double lo = std::nextafter(qb, 0.0), hi = std::nextafter(qb, INFINITY);
    c1 = std::max({c1, std::abs(g.h_cutoff(hi) - g.h(lo)) / g.h(lo),
                   std::abs(g.h_cutoff_prime(hi) - g.h_prime(lo)) / std::abs(g.h_prime(lo))});
  }
  ok = ok && trip <= 1e-12 && deriv <= 1e-6 && c1 <= 1e-8 && min_eig > 0.0;
  text += fmt(", h round trip %.1e, h' vs differences %.1e, cutoff C1 mismatch %.1e, min eigenvalue %.3e",
              trip, deriv, c1, min_eig);
  text += " (need <= 1e-12, <= 1e-12, <= 1e-6, <= 1e-8, > 0)";
  return {ok, text};
}

Outcome a5() {
  const CornerDomain domain = CornerDomain::wedge(1.5 * kPi, 1.0);
  const MeshPtr mesh = StripMesh::build(domain, {0.0, 3.0, 24, 12, 2});
  const GasModel gas(1.4, 0.8);
  const FlowModel model = FlowModel::compressible(gas);
  BoundaryConditions bcs;
  bcs.profile = FarfieldProfile::uniform_flux(0.05);
  const Constraints c = apply_boundary_conditions(*mesh, bcs);
  const Eigen::VectorXd base = solve_incompressible(mesh, bcs).field.psi;

  std::mt19937_64 rng(11);
  std::normal_distribution<double> normal;
  double worst = 0.0, worst_mach = 0.0;
  bool symmetric = true, definite = true;
  for (int trial = 0; trial < 5; ++trial) {
    // Random perturbation, rescaled so that the largest flux sits at a given
    // fraction of the cutoff threshold.
    Eigen::VectorXd psi = base;
    for (Eigen::Index k = 0; k < psi.size(); ++k) psi[k] += 1e-3 * normal(rng);
    impose(c, psi);
    const double fraction = 0.2 + 0.18 * trial;
    psi *= std::sqrt(fraction * gas.q_bar() / max_momentum_flux(*mesh, psi));
    worst_mach = std::max(worst_mach, cutoff_mach(gas, max_momentum_flux(*mesh, psi)));
    Eigen::VectorXd dir(psi.size());
    for (Eigen::Index k = 0; k < dir.size(); ++k) dir[k] = normal(rng);
    const SparseMatrix K = assemble_jacobian(*mesh, model, psi);
    const double t = 1e-6;
    const Eigen::VectorXd fd = (assemble_residual(*mesh, model, psi + t * dir) -
                                assemble_residual(*mesh, model, psi - t * dir)) /
                               (2.0 * t);
    const Eigen::VectorXd exact = K * dir;
    worst = std::max(worst, (fd - exact).norm() / exact.norm());
    const SparseMatrix Kt = K.transpose();
    symmetric = symmetric && (SparseMatrix(K - Kt).norm() == 0.0);

    const SparseMatrix Kc = assemble_jacobian(*mesh, model, psi, &c);
    Eigen::SimplicialLLT<SparseMatrix> llt(Kc);
    if (llt.info() != Eigen::Success) {
      definite = false;
    } else {
      const SparseMatrix L = llt.matrixL();
      for (Eigen::Index k = 0; k < L.rows(); ++k) definite = definite && L.coeff(k, k) > 0.0;
    }
  }
  const bool ok = worst <= 1e-5 && symmetric && definite;
  return {ok, fmt("directional derivative relative error %.2e at t = 1e-6 (max Mach %.2f), %s, %s "
                  "(need <= 1e-5, exact symmetry, positive pivots)",
                  worst, worst_mach, symmetric ? "exactly symmetric" : "not symmetric",
                  definite ? "Cholesky pivots positive" : "Cholesky failed")};
}

Outcome a6() {
  bool ok = true;
  std::string text;
  for (const auto& r : compressible_runs()) {
    const GasModel gas(1.4, 0.8);
    const FlowModel model = FlowModel::compressible(gas);
    BoundaryConditions bcs;
    bcs.profile = FarfieldProfile::uniform_flux(0.01);
    const Constraints c = apply_boundary_conditions(*r.mesh, bcs);
    const Eigen::VectorXd& psi = r.result.field.psi;
    const double n_cut = residual_norm(assemble_residual(*r.mesh, model, psi, &c), c);
    const double n_raw =
        residual_norm(assemble_residual(*r.mesh, model.with_raw_coefficient(), psi, &c), c);
    const double change = std::abs(n_raw - n_cut);
    const bool good = r.result.report.converged && !r.result.report.cutoff_active &&
                      change <= 4.0 * std::numeric_limits<double>::epsilon() * std::max(n_cut, 1e-300);
    ok = ok && good;
    text += fmt("%sL=%g: cutoff %s, max Mach %.3f, residual %.3e vs raw %.3e",
                text.empty() ? "" : "; ", r.L, r.result.report.cutoff_active ? "active" : "inactive",
                r.result.report.max_mach, n_cut, n_raw);
  }
  return {ok, text + " (need cutoff inactive, raw residual unchanged)"};
}

Outcome a7() {
  bool ok = true;
  std::string text;
  for (const auto& r : compressible_runs()) {
    const GradientMaps maps = gradient_maps(*r.mesh, r.result.field.psi);
    const QcSummary qc = quasiconformality(maps, r.result.report.max_mach, 0.05);
    ok = ok && qc.violation_fraction <= 0.01;
    text += fmt("%sL=%g: %.2f%% above bound + 0.05", text.empty() ? "" : "; ", r.L,
                100.0 * qc.violation_fraction);
  }
  // Needed tolerance (99th percentile excess) before and after one refinement.
  std::vector<double> p99;
  for (int refine : {1, 2}) {
    const FarRun r = refine == 1 ? compressible_runs().front() : farfield_run(4.0, true, 2);
    const GradientMaps maps = gradient_maps(*r.mesh, r.result.field.psi);
    p99.push_back(quasiconformality(maps, r.result.report.max_mach, 0.05).excess_p99);
  }
  ok = ok && p99[1] < p99[0] && p99[0] <= 0.05;
  text += fmt("; L=4 p99 excess %.3e -> %.3e under refinement (need <= 1%% and shrinking)", p99[0],
              p99[1]);
  return {ok, text};
}

Outcome a8() {
  bool ok = true;
  std::string text;
  double min_alpha = INFINITY;
  for (const auto& r : compressible_runs()) {
    const GradientMaps maps = gradient_maps(*r.mesh, r.result.field.psi);
    const DecayFit fit = fit_decay(dirichlet_profile(*r.mesh, maps), 1.0);
    min_alpha = std::min(min_alpha, fit.alpha);
  }
  ok = ok && min_alpha > 0.0;
  text += fmt("min fitted alpha over certified runs %.4f", min_alpha);

  const double opening = 1.5 * kPi;
  const CornerDomain domain = CornerDomain::wedge(opening, 1.0);
  const double theta0 = domain.mid_angle() - 0.5 * opening;
  const MeshSpec spec{0.0, 6.0, 96, 32, 2};
  const MeshPtr mesh = StripMesh::build(domain, spec);
  BoundaryConditions bcs;
  bcs.profile = FarfieldProfile::mode(1, 1.0);
  const SolveResult res = solve_incompressible(mesh, bcs);
  const DecayFit measured = fit_decay(dirichlet_profile(*mesh, gradient_maps(*mesh, res.field.psi)), 1.0);

  // Oracle: J(ell) of the exact mode by direct quadrature over lam.
  auto J = [&](double ell) {
    const BoundaryFrame frame = boundary_frame(domain, ell);
    std::vector<double> nodes, weights;
    StripMesh::gauss_rule(4, nodes, weights);
    const int cells = 64;
    double sum = 0.0;
    for (int c = 0; c < cells; ++c) {
      for (std::size_t a = 0; a < nodes.size(); ++a) {
        const double lam = (c + nodes[a]) / cells;
        const auto map = strip_map(domain, {ell, lam});
        const ExactSample s = wedge_mode(map.x, opening, theta0, 1, 1.0);
        const Mat2 hess = wedge_mode_hessian(map.x, opening, theta0, 1, 1.0);
        const Vec2 grad(-s.v.y(), s.v.x());
        const Vec2 f(grad.x(), -grad.y());
        const Mat2 flip = Eigen::Vector2d(1.0, -1.0).asDiagonal();
        Mat2 dfs = frame.B.transpose() * flip * hess * map.jacobian;
        dfs.col(0) += frame.dB.transpose() * f;
        sum += weights[a] / cells * dfs.squaredNorm();
      }
    }
    return sum;
  };
  const DecayFit oracle = fit_decay(tabulate_profile(J, 0.0, 6.0, 96, 2), 1.0);
  const double rel = std::abs(measured.alpha - oracle.alpha) / oracle.alpha;
  ok = ok && rel <= 0.10;
  text += fmt("; mode-1 alpha %.4f vs oracle %.4f, relative difference %.2e (need > 0, <= 10%%)",
              measured.alpha, oracle.alpha, rel);
  return {ok, text};
}

Outcome a9() {
  const double opening = 1.5 * kPi;
  // Sheet along +x: its angle is rotation + opening / 2 - pi.
  const CornerDomain domain = CornerDomain::wedge(opening, 1.0, kPi - 0.5 * opening);
  const VortexSheetFlow sheet(domain, Vec2(0.3, 0.0));
  const TestRegion region = sheet_region(sheet, domain.r_min());
  std::vector<double> mass, momentum;
  for (int cells : {1, 2, 4, 8}) {
    const WeakResidual w = weak_euler_residual(sheet.sampler(), region, cells);
    mass.push_back(w.mass);
    momentum.push_back(w.momentum);
  }
  const WeakResidual wrong = weak_euler_residual(sheet.sampler_with_density_below(0.5), region, 8);
  bool shrinking = true;
  for (std::size_t k = 1; k < mass.size(); ++k) {
    shrinking = shrinking && mass[k] <= mass[k - 1] * 1.01 + 1e-15 &&
                momentum[k] <= momentum[k - 1] * 1.01 + 1e-15;
  }
  const MeshPtr mesh = StripMesh::build(domain, {0.0, 4.0, 64, 31, 2});
  const double density = sheet_line_density(*mesh, sheet, 1.0, 3.0);
  const double rel = std::abs(density - 0.3) / 0.3;
  const bool ok = shrinking && mass.back() <= 1e-6 && momentum.back() <= 1e-6 && rel <= 0.02;
  return {ok, fmt("weak mass residual %.1e -> %.1e, momentum %.1e -> %.1e under quadrature "
                  "refinement (mismatched density gives %.1e); sheet line density %.6f vs |v_inf| "
                  "0.3, relative %.1e (need <= 1e-6, within 2%%)",
                  mass.front(), mass.back(), momentum.front(), momentum.back(), wrong.momentum,
                  density, rel)};
}

Outcome a10() {
  bool ok = true;
  std::string text;
  std::vector<ExperimentConfig> configs;
  {
    ExperimentConfig c = wedge_config(4.0, true);
    configs.push_back(c);
    ExperimentConfig e;
    e.domain.kind = "example";
    e.ell_min_auto = false;
    e.mesh.ell_min = std::log(2.0);
    e.mesh.ell_max = 5.0;
    e.mesh.n_ell = 48;
    e.mesh.n_lam = 24;
    e.bcs.profile = "exact";
    e.bcs.reference = "example";
    e.bcs.amplitude = 1.0;
    configs.push_back(e);
  }
  for (const auto& cfg : configs) {
    const std::string a = format_report(run_case(cfg).report);
    const std::string b = format_report(run_case(cfg).report);
    const CaseOutcome third = run_case(parse_config(serialize_config(cfg)));
    const bool same = a == b && a == format_report(third.report);
    ok = ok && same;
    text += fmt("%s%s: %zu bytes, %s", text.empty() ? "" : "; ", cfg.domain.kind.c_str(), a.size(),
                same ? "identical" : "different");
  }
  return {ok, text + " (need byte-identical reports)"};
}

std::set<std::string> split(const std::string& s) {
  std::set<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) {
    if (!item.empty()) out.insert(item);
  }
  return out;
}

}  // namespace

int main(int argc, char** argv) {
  std::set<std::string> only, expect_fail;
  for (int k = 1; k + 1 < argc; k += 2) {
    const std::string flag = argv[k];
    if (flag == "--only") only = split(argv[k + 1]);
    else if (flag == "--expect-fail") expect_fail = split(argv[k + 1]);
  }
  const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria = {
      {"A1", a1}, {"A2", a2}, {"A3", a3}, {"A4", a4}, {"A5", a5},
      {"A6", a6}, {"A7", a7}, {"A8", a8}, {"A9", a9}, {"A10", a10},
  };
  int unexpected = 0;
  for (const auto& [id, run] : criteria) {
    if (!only.empty() && !only.count(id)) continue;
    Outcome o;
    try {
      o = run();
    } catch (const std::exception& e) {
      o = {false, std::string("exception: ") + e.what()};
    }
    const bool expected = expect_fail.count(id) > 0;
    std::printf("%s %s %s%s\n", o.pass ? "PASS" : "FAIL", id.c_str(), o.detail.c_str(),
                !o.pass && expected ? " [known failure]" : "");
    std::fflush(stdout);
    if (!o.pass && !expected) ++unexpected;
  }
  return unexpected;
}
