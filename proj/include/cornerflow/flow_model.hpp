#pragma once

#include <optional>

#include "cornerflow/gas.hpp"

namespace cornerflow {

/// Selects the coefficient h in div(h(|grad psi|^2 / 2) grad psi) = 0.
///
/// Incompressible flow uses h = 1. Compressible flow uses the cutoff
/// coefficient by default; the raw Bernoulli coefficient is only meant for
/// re-checking converged fields and throws beyond q_sonic.
class FlowModel {
 public:
  enum class Coefficient { Cutoff, Raw };

  static FlowModel incompressible() { return FlowModel{}; }
  static FlowModel compressible(const GasModel& gas, Coefficient c = Coefficient::Cutoff) {
    FlowModel m;
    m.gas_ = gas;
    m.coefficient_ = c;
    return m;
  }

  bool is_compressible() const { return gas_.has_value(); }
  const GasModel& gas() const { return gas_.value(); }
  Coefficient coefficient_kind() const { return coefficient_; }

  FlowModel with_raw_coefficient() const {
    FlowModel m = *this;
    m.coefficient_ = Coefficient::Raw;
    return m;
  }

  double h(double q) const {
    if (!gas_) return 1.0;
    return coefficient_ == Coefficient::Cutoff ? gas_->h_cutoff(q) : gas_->h(q);
  }
  double h_prime(double q) const {
    if (!gas_) return 0.0;
    return coefficient_ == Coefficient::Cutoff ? gas_->h_cutoff_prime(q) : gas_->h_prime(q);
  }
  /// Energy density H with H' = h and H(0) = 0.
  double energy_density(double q) const {
    if (!gas_) return q;
    return coefficient_ == Coefficient::Cutoff ? gas_->h_cutoff_integral(q) : gas_->h_integral(q);
  }

 private:
  FlowModel() = default;
  std::optional<GasModel> gas_;
  Coefficient coefficient_ = Coefficient::Cutoff;
};

}  // namespace cornerflow
