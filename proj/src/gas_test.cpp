#include <doctest.h>

#include <cmath>
#include <random>
#include <stdexcept>

#include "cornerflow/gas.hpp"

using cornerflow::GasModel;

TEST_CASE("rest state and characteristic speeds") {
  const GasModel g(1.4, 0.8);
  const auto s = g.state_from_density(1.0);
  CHECK(s.pressure == doctest::Approx(1.0 / 1.4).epsilon(1e-15));
  CHECK(s.sound_speed == doctest::Approx(1.0).epsilon(1e-15));
  const auto c = g.characteristic_speeds();
  CHECK(c.limit == doctest::Approx(std::sqrt(2.0 / 0.4)).epsilon(1e-14));
  CHECK(c.critical == doctest::Approx(std::sqrt(2.0 / 2.4)).epsilon(1e-14));
  CHECK(g.mach_from_momentum(0.0) == 0.0);
  CHECK(g.density_from_speed(0.0) == 1.0);
}

TEST_CASE("sonic momentum flux closed forms") {
  CHECK(std::abs(GasModel(2.0, 0.5).q_sonic() - 4.0 / 27.0) <= 1e-12);
  for (double gamma : {1.4, 5.0 / 3.0, 2.0, 3.0}) {
    const GasModel g(gamma, 0.9);
    // sonic: rho* = (2 / (gamma + 1))^(1 / (gamma - 1)), q* = rho*^(gamma + 1) / 2
    const double rho = std::pow(2.0 / (gamma + 1.0), 1.0 / (gamma - 1.0));
    CHECK(g.sonic_density() == doctest::Approx(rho).epsilon(1e-14));
    CHECK(g.q_sonic() == doctest::Approx(0.5 * std::pow(rho, gamma + 1.0)).epsilon(1e-13));
    CHECK(g.mach_from_momentum(g.q_sonic()) == doctest::Approx(1.0).epsilon(1e-12));
  }
}

TEST_CASE("h inverts the Bernoulli relation") {
  std::mt19937_64 rng(3);
  std::uniform_real_distribution<double> u(0.0, 1.0);
  for (double gamma : {1.4, 5.0 / 3.0, 2.0}) {
    const GasModel g(gamma, 0.8);
    double worst = 0.0;
    for (int k = 0; k < 1000; ++k) {
      const double rho = g.sonic_density() + (1.0 - g.sonic_density()) * u(rng);
      const double q = rho * rho * (1.0 - std::pow(rho, gamma - 1.0)) / (gamma - 1.0);
      worst = std::max(worst, std::abs(g.h(q) * rho - 1.0));
    }
    CHECK(worst <= 1e-12);
  }
}

TEST_CASE("h' and the energy density agree with differences") {
  const GasModel g(1.4, 0.8);
  const double d = 1e-5 * g.q_sonic();
  for (double f : {0.01, 0.2, 0.5, 0.9, 0.97}) {
    const double q = f * g.q_sonic();
    const double fd = (g.h(q + d) - g.h(q - d)) / (2.0 * d);
    CHECK(std::abs(fd / g.h_prime(q) - 1.0) <= 1e-6);
    const double fi = (g.h_integral(q + d) - g.h_integral(q - d)) / (2.0 * d);
    CHECK(std::abs(fi / g.h(q) - 1.0) <= 1e-8);
  }
  CHECK(g.h_integral(0.0) == 0.0);
  // tiny fluxes: H(q) = q + q^2 / 2 + ...
  CHECK(g.h_integral(1e-8) == doctest::Approx(1e-8 + 5e-17).epsilon(1e-14));
}

TEST_CASE("cutoff is C1 at q_bar and keeps ellipticity") {
  for (double gamma : {1.4, 5.0 / 3.0, 2.0}) {
    const GasModel g(gamma, 0.8);
    CHECK(g.mach_from_momentum(g.q_bar()) == doctest::Approx(0.8).epsilon(1e-12));
    CHECK(g.alpha_hat() > -0.5);
    const double lo = std::nextafter(g.q_bar(), 0.0), hi = std::nextafter(g.q_bar(), 1.0);
    CHECK(std::abs(g.h_cutoff(hi) / g.h(lo) - 1.0) <= 1e-8);
    CHECK(std::abs(g.h_cutoff_prime(hi) / g.h_prime(lo) - 1.0) <= 1e-8);
    const double q = 3.0 * g.q_bar(), d = 1e-6 * q;
    CHECK((g.h_cutoff_integral(q + d) - g.h_cutoff_integral(q - d)) / (2.0 * d) ==
          doctest::Approx(g.h_cutoff(q)).epsilon(1e-7));
    for (int k = 0; k <= 100; ++k) {
      const auto e = g.ellipticity_eigenvalues(0.1 * k * g.q_bar());
      CHECK(e.tangential > 0.0);
      CHECK(e.streamwise > 0.0);
    }
  }
}

TEST_CASE("invalid gas parameters") {
  CHECK_THROWS_AS(GasModel(1.0, 0.5), std::invalid_argument);
  CHECK_THROWS_AS(GasModel(1.4, 1.0), std::invalid_argument);
  CHECK_THROWS_AS(GasModel(1.4, 0.0), std::invalid_argument);
  const GasModel g(1.4, 0.8);
  CHECK_THROWS_AS(g.h(1.01 * g.q_sonic()), std::domain_error);
  CHECK_THROWS_AS(g.h(-1e-3), std::domain_error);
  CHECK_NOTHROW(g.h_cutoff(10.0 * g.q_sonic()));
}
