// Polytropic closure for steady isentropic flow, normalized so that the rest
// state has rho = 1, c = 1 and p = 1/gamma.
#pragma once

namespace cornerflow {

struct ThermoState {
  double pressure;
  double sound_speed;
  double enthalpy;
};

struct CharacteristicSpeeds {
  double limit;
  double critical;
};

struct EllipticityEigenvalues {
  double tangential;  // eigenvalue along m-perp
  double streamwise;  // eigenvalue along m
};

/// Polytropic gas p = rho^gamma / gamma with Bernoulli constant fixed by the
/// rest state. Besides the classical laws it carries the stream-function
/// coefficient h(q) = 1/rho as a function of q = |rho v|^2 / 2, and the C^1
/// power-law continuation h_cutoff beyond q_bar that keeps the operator
/// div(h(|grad psi|^2/2) grad psi) uniformly elliptic.
///
/// Immutable after construction; every member is safe to call concurrently.
class GasModel {
 public:
  /// Throws std::invalid_argument unless gamma > 1 and 0 < mach_cap < 1.
  GasModel(double gamma, double mach_cap);

  double gamma() const { return gamma_; }
  double mach_cap() const { return mach_cap_; }
  double q_bar() const { return q_bar_; }
  double alpha_hat() const { return alpha_hat_; }
  double q_sonic() const { return q_sonic_; }
  double sonic_density() const { return rho_sonic_; }

  ThermoState state_from_density(double rho) const;
  double pressure(double rho) const;
  double sound_speed(double rho) const;
  double enthalpy(double rho) const;

  double density_from_speed(double speed) const;
  CharacteristicSpeeds characteristic_speeds() const;

  /// Speed at which the Mach number equals `mach` (0 <= mach <= 1).
  double speed_at_mach(double mach) const;

  /// Density solving q rho^-2 + pi(rho) = pi(1) on the subsonic branch.
  double density_from_momentum(double q) const;
  double h(double q) const;
  double h_prime(double q) const;
  /// Mach number of the subsonic state with momentum flux q.
  double mach_from_momentum(double q) const;

  /// Antiderivative of h with value 0 at q = 0 (0 <= q <= q_sonic).
  double h_integral(double q) const;

  double h_cutoff(double q) const;
  double h_cutoff_prime(double q) const;
  /// Antiderivative of h_cutoff with value 0 at q = 0.
  double h_cutoff_integral(double q) const;

  EllipticityEigenvalues ellipticity_eigenvalues(double q) const;

 private:
  double gamma_;
  double mach_cap_;
  double rho_sonic_;
  double q_sonic_;
  double q_bar_;
  double h_bar_;
  double alpha_hat_;
  double integral_bar_;
};

}  // namespace cornerflow
