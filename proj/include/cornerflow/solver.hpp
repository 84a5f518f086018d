// Damped Newton with amplitude continuation for the constrained stream-function
// system, plus the post-hoc subsonic certificate.
#pragma once

#include <span>
#include <stdexcept>
#include <string>
#include <vector>

#include "cornerflow/discretization.hpp"
#include "cornerflow/gas.hpp"

namespace cornerflow {

enum class LinearSolver { Direct, ConjugateGradient };

struct SolveConfig {
  double newton_tol = 1e-10;  // on |R_free| / sqrt(n_free)
  int max_newton = 60;
  double backtrack = 0.5;
  double min_step = 0x1p-20;
  int continuation_steps = 1;
  double linear_tol = 1e-12;  // conjugate gradients only
  LinearSolver linear = LinearSolver::Direct;

  /// Throws std::invalid_argument naming the offending field.
  void validate() const;

  bool operator==(const SolveConfig&) const = default;
};

struct SolveReport {
  bool converged = false;
  int iterations = 0;
  double residual_norm = 0.0;
  double max_q = 0.0;
  bool cutoff_active = false;
  double max_mach = 0.0;
  double energy = 0.0;
  std::vector<double> history;  // residual norm before every Newton step and at exit
};

struct SolveResult {
  StreamField field;
  SolveReport report;
};

/// Newton stagnated or ran out of iterations; carries the last iterate.
class DivergenceError : public std::runtime_error {
 public:
  DivergenceError(const std::string& what, SolveResult last)
      : std::runtime_error(what), last_(std::move(last)) {}
  const SolveResult& last() const { return last_; }

 private:
  SolveResult last_;
};

/// Mach number of the state with momentum flux q under the cutoff closure
/// (rho = 1 / h_cutoff); equals the true Mach number for q <= q_bar.
double cutoff_mach(const GasModel& gas, double q);

/// Normalized constrained residual |R_free| / sqrt(n_free).
double residual_norm(const Eigen::VectorXd& r, const Constraints& c);

SolveResult solve_incompressible(const MeshPtr& mesh, const BoundaryConditions& bcs,
                                 const SolveConfig& config = {});

/// Initial guess: `initial` if given, else the incompressible solution.
SolveResult solve_compressible(const MeshPtr& mesh, const GasModel& gas,
                               const BoundaryConditions& bcs, const SolveConfig& config = {},
                               const Eigen::VectorXd* initial = nullptr);

struct SweepResult {
  std::vector<double> amplitudes;  // amplitudes actually solved
  std::vector<SolveResult> runs;
  double reached_amplitude = 0.0;  // largest amplitude with a certified run
  bool stopped_early = false;
  std::string stop_reason;
};

/// Warm-started solves over ascending amplitudes; stops once max Mach exceeds
/// the gas cap or the cutoff is active at convergence.
SweepResult continuation_sweep(const MeshPtr& mesh, const GasModel& gas,
                               const BoundaryConditions& bcs, std::span<const double> amplitudes,
                               const SolveConfig& config = {});

}  // namespace cornerflow
