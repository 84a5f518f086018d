#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cornerflow/fields.hpp"
#include "cornerflow/solver.hpp"

using namespace cornerflow;

namespace {
constexpr double kPi = std::numbers::pi;

MeshPtr wedge_mesh(int n_ell, int n_lam, double L = 3.0) {
  return StripMesh::build(CornerDomain::wedge(1.5 * kPi, 1.0), {0.0, L, n_ell, n_lam, 2});
}

BoundaryConditions uniform(double m_inf) {
  BoundaryConditions b;
  b.profile = FarfieldProfile::uniform_flux(m_inf);
  return b;
}
}  // namespace

TEST_CASE("solve config validation") {
  SolveConfig c;
  CHECK_NOTHROW(c.validate());
  c.newton_tol = 0.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.backtrack = 1.0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
  c = {};
  c.max_newton = 0;
  CHECK_THROWS_AS(c.validate(), std::invalid_argument);
}

TEST_CASE("zero data gives the rest state") {
  const auto m = wedge_mesh(12, 6);
  const GasModel gas(1.4, 0.8);
  const auto r = solve_compressible(m, gas, uniform(0.0));
  CHECK(r.report.converged);
  CHECK(r.field.psi.lpNorm<Eigen::Infinity>() == 0.0);
  CHECK(r.report.max_mach == 0.0);
}

TEST_CASE("incompressible modes converge at second order") {
  const auto ref = wedge_mode_reference(1.5 * kPi, -0.75 * kPi, 1);
  BoundaryConditions b;
  b.profile = FarfieldProfile::exact(ref, 0.1);
  std::vector<double> err;
  for (int n : {12, 24, 48}) {
    const auto m = wedge_mesh(2 * n, n);
    const auto r = solve_incompressible(m, b);
    CHECK(r.report.converged);
    err.push_back(l2_error(*m, r.field.psi, [&](const Vec2& x) { return 0.1 * ref.psi(x); }).relative());
  }
  CHECK(std::log2(err[0] / err[1]) == doctest::Approx(2.0).epsilon(0.1));
  CHECK(std::log2(err[1] / err[2]) == doctest::Approx(2.0).epsilon(0.1));
}

TEST_CASE("subsonic compressible solve is certified by the raw coefficient") {
  const auto m = wedge_mesh(24, 12);
  const GasModel gas(1.4, 0.8);
  const auto bcs = uniform(0.05);
  const auto r = solve_compressible(m, gas, bcs);
  CHECK(r.report.converged);
  CHECK(r.report.residual_norm <= SolveConfig{}.newton_tol);
  CHECK_FALSE(r.report.cutoff_active);
  CHECK(r.report.max_mach < 0.8);
  CHECK(r.report.max_mach == doctest::Approx(cutoff_mach(gas, r.report.max_q)));
  const auto c = apply_boundary_conditions(*m, bcs);
  const auto raw = FlowModel::compressible(gas).with_raw_coefficient();
  CHECK(residual_norm(assemble_residual(*m, raw, r.field.psi, &c), c) <= 1e-10);
  // Newton converges quadratically: the last steps shrink fast
  const auto& h = r.report.history;
  REQUIRE(h.size() >= 3);
  CHECK(h.back() < 1e-3 * h[h.size() - 2] + 1e-14);

  const auto inc = solve_incompressible(m, bcs);
  CHECK(r.report.max_q != inc.report.max_q);
}

TEST_CASE("conjugate gradients match the direct solver") {
  const auto m = wedge_mesh(16, 8);
  const GasModel gas(1.4, 0.8);
  SolveConfig cg;
  cg.linear = LinearSolver::ConjugateGradient;
  const auto a = solve_compressible(m, gas, uniform(0.05));
  const auto b = solve_compressible(m, gas, uniform(0.05), cg);
  CHECK((a.field.psi - b.field.psi).lpNorm<Eigen::Infinity>() <= 1e-9);
}

TEST_CASE("continuation stops above the Mach cap") {
  const auto m = wedge_mesh(16, 8);
  const GasModel gas(1.4, 0.6);
  const std::vector<double> ladder{0.05, 0.1, 0.2, 0.3, 0.4, 0.5};
  const auto s = continuation_sweep(m, gas, uniform(0.0), ladder);
  CHECK(s.stopped_early);
  CHECK_FALSE(s.stop_reason.empty());
  CHECK(s.reached_amplitude >= 0.05);
  CHECK(s.reached_amplitude < 0.5);
  CHECK(s.runs.size() == s.amplitudes.size());
  for (std::size_t i = 0; i + 1 < s.runs.size(); ++i) CHECK(s.runs[i].report.max_mach <= 0.6);
}
