#include <doctest.h>

#include <cmath>
#include <numbers>
#include <stdexcept>
#include <vector>

#include "cornerflow/diagnostics.hpp"

using namespace cornerflow;

namespace {
constexpr double kPi = std::numbers::pi;
}

TEST_CASE("decay fit recovers exponential profiles") {
  for (double alpha : {0.25, 1.0 / 3.0, 0.5, 1.0}) {
    const auto p = tabulate_profile([&](double l) { return 3.0 * std::exp(-2.0 * alpha * l); }, 0.0, 6.0, 48, 3);
    const auto fit = fit_decay(p, 1.0);
    CHECK(fit.alpha == doctest::Approx(alpha).epsilon(1e-6));
    CHECK(fit.amplitude == doctest::Approx(3.0).epsilon(1e-5));
    CHECK(fit.residual <= 1e-6);
  }
  const auto zero = fit_decay(tabulate_profile([](double) { return 0.0; }, 0.0, 6.0, 24, 2), 1.0);
  CHECK(std::isinf(zero.alpha));
  CHECK_THROWS_AS(fit_decay(tabulate_profile([](double) { return 1.0; }, 0.0, 2.0, 2, 1), 1.0),
                  std::invalid_argument);
}

TEST_CASE("Aitken extrapolation") {
  const std::vector<double> geometric{1.5, 1.25, 1.125};
  CHECK(extrapolate_limit(geometric) == doctest::Approx(1.0));
  const std::vector<double> toward_zero{0.4, 0.2, 0.1};
  CHECK(std::abs(extrapolate_limit(toward_zero)) <= 1e-15);
  const std::vector<double> growing{1.0, 2.0, 4.0};
  CHECK(extrapolate_limit(growing) == 4.0);
  const std::vector<double> two{3.0, 2.0};
  CHECK(extrapolate_limit(two) == 2.0);
  // limits below zero of nonnegative data are clamped
  const std::vector<double> overshoot{0.3, 0.1, 0.05};
  CHECK(extrapolate_limit(overshoot) >= 0.0);
  CHECK_THROWS_AS(extrapolate_limit(std::vector<double>{}), std::invalid_argument);
}

TEST_CASE("unit bands respect the margin") {
  const auto m = StripMesh::build(CornerDomain::wedge(1.5 * kPi, 1.0), {0.0, 5.0, 20, 4, 2});
  const auto b = unit_bands(*m, 1.0);
  REQUIRE(b.size() == 4);
  CHECK(b.back() == Band{3.0, 4.0});
  CHECK(unit_bands(*m, 2.5).size() == 2);
}

TEST_CASE("gradient maps of a wall-vanishing field") {
  const auto d = CornerDomain::example();
  const auto m = StripMesh::build(d, {std::log(2.0), 4.0, 64, 32, 2});
  const Eigen::VectorXd psi = interpolate(*m, [](const Vec2& x) {
    const double th = std::atan2(x.y(), x.x());
    return std::pow(x.norm(), 2.0 / 3.0) * std::cos(2.0 * th / 3.0) - 1.0;
  });
  const auto g = gradient_maps(*m, psi);
  CHECK(g.f.size() == m->quad_points().size());
  CHECK(g.node_f.size() == static_cast<std::size_t>(m->node_count()));
  CHECK(g.wall_trace <= 1e-3);
  // f = M grad psi is conformal for a harmonic psi
  const auto qc = quasiconformality(g, 0.0, 0.1);
  CHECK(qc.violation_fraction == 0.0);
  CHECK(qc.max_ratio <= 1.1);
  const auto prof = dirichlet_profile(*m, g);
  CHECK(prof.total > 0.0);
  CHECK(prof.J.size() == prof.ell.size());
}

TEST_CASE("Hoelder seminorm at infinity") {
  std::vector<HolderSample> constant, sheared;
  for (int i = 0; i < 200; ++i) {
    const Vec2 x(std::exp(0.03 * i) * std::cos(0.1 * i), std::exp(0.03 * i) * std::sin(0.1 * i));
    constant.push_back({x, Vec2(1.0, 2.0)});
    sheared.push_back({x, Vec2(std::pow(x.norm(), -2.0 / 3.0), 0.0)});
  }
  CHECK(holder_at_infinity(constant, 1.0 / 3.0, 5000, 7).seminorm == 0.0);
  const auto a = holder_at_infinity(sheared, 1.0 / 3.0, 5000, 7);
  const auto b = holder_at_infinity(sheared, 1.0 / 3.0, 5000, 7);
  CHECK(a.seminorm > 0.0);
  CHECK(a.seminorm == b.seminorm);
  CHECK(a.pairs > 0);
  CHECK(a.pairs <= 5000);
}

TEST_CASE("report entries use 17 digits") {
  CHECK(format_number(0.1) == "0.10000000000000001");
  CHECK(format_number(2.0) == "2");
  DiagnosticsReport r;
  const auto e = report_entries(r);
  CHECK_FALSE(e.empty());
  bool has_ok = false;
  for (const auto& [k, v] : e) has_ok |= k == "farfield.ok";
  CHECK(has_ok);
}
