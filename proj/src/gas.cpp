#include "cornerflow/gas.hpp"

#include <cmath>
#include <limits>
#include <stdexcept>
#include <string>

namespace cornerflow {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

}  // namespace

GasModel::GasModel(double gamma, double mach_cap) : gamma_(gamma), mach_cap_(mach_cap) {
  if (!(gamma > 1.0) || !std::isfinite(gamma)) {
    throw std::invalid_argument("gas: gamma must be a finite number greater than 1, got " +
                                std::to_string(gamma));
  }
  if (!(mach_cap > 0.0 && mach_cap < 1.0)) {
    throw std::invalid_argument("gas: mach_cap must lie in (0, 1), got " + std::to_string(mach_cap));
  }
  const double g1 = gamma_ - 1.0;
  rho_sonic_ = std::pow(2.0 / (gamma_ + 1.0), 1.0 / g1);
  q_sonic_ = 0.5 * std::pow(rho_sonic_, gamma_ + 1.0);

  const double s = speed_at_mach(mach_cap_);
  const double rho = density_from_speed(s);
  q_bar_ = 0.5 * (rho * s) * (rho * s);
  h_bar_ = h(q_bar_);
  alpha_hat_ = q_bar_ * h_prime(q_bar_) / h_bar_;
  integral_bar_ = h_integral(q_bar_);
}

double GasModel::pressure(double rho) const {
  if (!(rho >= 0.0)) throw std::domain_error("gas: negative density");
  return std::pow(rho, gamma_) / gamma_;
}

double GasModel::sound_speed(double rho) const {
  if (!(rho >= 0.0)) throw std::domain_error("gas: negative density");
  return std::pow(rho, 0.5 * (gamma_ - 1.0));
}

double GasModel::enthalpy(double rho) const {
  if (!(rho >= 0.0)) throw std::domain_error("gas: negative density");
  return std::pow(rho, gamma_ - 1.0) / (gamma_ - 1.0);
}

ThermoState GasModel::state_from_density(double rho) const {
  return {pressure(rho), sound_speed(rho), enthalpy(rho)};
}

double GasModel::density_from_speed(double speed) const {
  const double limit = characteristic_speeds().limit;
  if (!(speed >= 0.0)) throw std::domain_error("gas: negative speed");
  if (speed > limit) {
    throw std::domain_error("gas: density is undefined above the limit speed " +
                            std::to_string(limit));
  }
  const double base = std::max(0.0, 1.0 - 0.5 * (gamma_ - 1.0) * speed * speed);
  return std::pow(base, 1.0 / (gamma_ - 1.0));
}

CharacteristicSpeeds GasModel::characteristic_speeds() const {
  return {std::sqrt(2.0 / (gamma_ - 1.0)), std::sqrt(2.0 / (gamma_ + 1.0))};
}

double GasModel::speed_at_mach(double mach) const {
  if (!(mach >= 0.0 && mach <= 1.0)) throw std::domain_error("gas: mach outside [0, 1]");
  const double m2 = mach * mach;
  return std::sqrt(m2 / (1.0 + 0.5 * (gamma_ - 1.0) * m2));
}

double GasModel::density_from_momentum(double q) const {
  if (!(q >= 0.0) || q > q_sonic_) {
    throw std::domain_error("gas: momentum flux q = " + std::to_string(q) +
                            " outside [0, q_sonic]");
  }
  if (q == 0.0) return 1.0;
  if (q == q_sonic_) return rho_sonic_;

  const double g1 = gamma_ - 1.0;
  // F(rho) = q rho^-2 + pi(rho) - pi(1); increasing on [rho*, 1].
  auto residual = [&](double rho) { return q / (rho * rho) + std::expm1(g1 * std::log(rho)) / g1; };
  auto slope = [&](double rho) { return -2.0 * q / (rho * rho * rho) + std::pow(rho, gamma_ - 2.0); };

  double lo = rho_sonic_;
  double hi = 1.0;
  while (hi - lo > 1e-6) {
    const double mid = 0.5 * (lo + hi);
    (residual(mid) > 0.0 ? hi : lo) = mid;
  }
  // Newton polish, safeguarded by the bracket.
  double rho = 0.5 * (lo + hi);
  for (int it = 0; it < 100; ++it) {
    const double f = residual(rho);
    if (f == 0.0) break;
    (f > 0.0 ? hi : lo) = rho;
    const double df = slope(rho);
    double next = rho - f / df;
    if (!(df > 0.0) || !(next > lo && next < hi)) next = 0.5 * (lo + hi);
    const double step = std::abs(next - rho);
    rho = next;
    if (step <= 4.0 * kEps * rho || hi - lo <= 2.0 * kEps * rho) break;
  }
  return rho;
}

double GasModel::h(double q) const { return 1.0 / density_from_momentum(q); }

double GasModel::h_prime(double q) const {
  if (!(q >= 0.0) || q >= q_sonic_) {
    throw std::domain_error("gas: h' requires 0 <= q < q_sonic, got q = " + std::to_string(q));
  }
  const double rho = density_from_momentum(q);
  const double denom = std::pow(rho, gamma_ - 2.0) - 2.0 * q / (rho * rho * rho);
  return 1.0 / (rho * rho * rho * rho * denom);
}

double GasModel::mach_from_momentum(double q) const {
  const double rho = density_from_momentum(q);
  const double speed = std::sqrt(2.0 * q) / rho;
  return speed / sound_speed(rho);
}

double GasModel::h_cutoff(double q) const {
  if (!(q >= 0.0)) throw std::domain_error("gas: negative momentum flux");
  if (q <= q_bar_) return h(q);
  return std::pow(q / q_bar_, alpha_hat_) * h_bar_;
}

double GasModel::h_cutoff_prime(double q) const {
  if (!(q >= 0.0)) throw std::domain_error("gas: negative momentum flux");
  if (q <= q_bar_) return h_prime(q);
  return alpha_hat_ * h_cutoff(q) / q;
}

double GasModel::h_integral(double q) const {
  // int_0^q h = q / rho + (rho - 1) / (g - 1) - (rho^g - 1) / (g (g - 1)); the last two
  // terms cancel to O((rho - 1)^2), so small |rho - 1| uses the binomial series.
  const double rho = density_from_momentum(q);
  const double g1 = gamma_ - 1.0;
  const double x = rho - 1.0;
  double tail = 0.0;
  if (std::abs(x) < 0.25) {
    double coeff = 1.0;  // binom(gamma, k) / (gamma (gamma - 1))
    double power = x;
    for (int k = 2; k < 80; ++k) {
      coeff *= (k == 2 ? 0.5 : (gamma_ - k + 1.0) / k);
      power *= x;
      const double term = coeff * power;
      tail -= term;
      if (std::abs(term) <= 0.25 * kEps * std::abs(tail)) break;
    }
  } else {
    tail = x / g1 - std::expm1(gamma_ * std::log(rho)) / (gamma_ * g1);
  }
  return q / rho + tail;
}

double GasModel::h_cutoff_integral(double q) const {
  if (!(q >= 0.0)) throw std::domain_error("gas: negative momentum flux");
  if (q <= q_bar_) return h_integral(q);
  const double a1 = alpha_hat_ + 1.0;
  return integral_bar_ + h_bar_ * q_bar_ * (std::pow(q / q_bar_, a1) - 1.0) / a1;
}

EllipticityEigenvalues GasModel::ellipticity_eigenvalues(double q) const {
  const double ht = h_cutoff(q);
  return {ht, ht + 2.0 * q * h_cutoff_prime(q)};
}

}  // namespace cornerflow
