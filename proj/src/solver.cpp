#include "cornerflow/solver.hpp"

#include <Eigen/IterativeLinearSolvers>
#include <Eigen/SparseCholesky>

#include <cmath>
#include <limits>
#include <sstream>

namespace cornerflow {

namespace {

constexpr double kEps = std::numeric_limits<double>::epsilon();

Eigen::VectorXd linear_solve(const SparseMatrix& K, const Eigen::VectorXd& rhs,
                             const SolveConfig& cfg) {
  if (cfg.linear == LinearSolver::Direct) {
    Eigen::SimplicialLLT<SparseMatrix> llt(K);
    if (llt.info() != Eigen::Success) {
      throw std::runtime_error("linear solver breakdown: Jacobian is not positive definite");
    }
    return llt.solve(rhs);
  }
  Eigen::ConjugateGradient<SparseMatrix, Eigen::Lower | Eigen::Upper> cg(K);
  cg.setTolerance(cfg.linear_tol);
  cg.setMaxIterations(std::max<Eigen::Index>(1000, 10 * K.rows()));
  Eigen::VectorXd x = cg.solve(rhs);
  if (cg.info() != Eigen::Success) {
    throw std::runtime_error("linear solver breakdown: conjugate gradients did not converge");
  }
  return x;
}

void finish_report(const StripMesh& mesh, const FlowModel& model, const Eigen::VectorXd& psi,
                   SolveReport& rep) {
  rep.max_q = max_momentum_flux(mesh, psi);
  rep.energy = discrete_energy(mesh, model, psi);
  if (model.is_compressible()) {
    rep.cutoff_active = rep.max_q > model.gas().q_bar();
    rep.max_mach = cutoff_mach(model.gas(), rep.max_q);
  } else {
    rep.cutoff_active = false;
    rep.max_mach = 0.0;
  }
}

SolveResult newton(const MeshPtr& mesh, const FlowModel& model, const Constraints& c,
                   Eigen::VectorXd psi, const SolveConfig& cfg, SolveReport rep) {
  impose(c, psi);
  Eigen::VectorXd r = assemble_residual(*mesh, model, psi, &c);
  double norm = residual_norm(r, c);
  double energy = discrete_energy(*mesh, model, psi);

  auto fail = [&](const std::string& why) {
    rep.converged = false;
    rep.residual_norm = norm;
    rep.history.push_back(norm);
    finish_report(*mesh, model, psi, rep);
    throw DivergenceError(why, SolveResult{StreamField{mesh, psi}, rep});
  };

  for (int it = 0;; ++it) {
    if (norm <= cfg.newton_tol) break;
    if (it == cfg.max_newton) {
      std::ostringstream msg;
      msg << "Newton did not converge in " << cfg.max_newton << " iterations (residual " << norm
          << ")";
      fail(msg.str());
    }
    rep.history.push_back(norm);
    const SparseMatrix K = assemble_jacobian(*mesh, model, psi, &c);
    const Eigen::VectorXd delta = linear_solve(K, -r, cfg);

    bool accepted = false;
    for (double t = 1.0; t >= cfg.min_step; t *= cfg.backtrack) {
      Eigen::VectorXd trial = psi + t * delta;
      const Eigen::VectorXd rt = assemble_residual(*mesh, model, trial, &c);
      const double nt = residual_norm(rt, c);
      const double et = discrete_energy(*mesh, model, trial);
      // rounding level of a sum over all quadrature points
      const double slack = 16.0 * kEps * std::sqrt(static_cast<double>(mesh->quad_points().size())) *
                           std::abs(energy);
      if (nt < norm && et <= energy + slack) {
        psi = std::move(trial);
        r = rt;
        norm = nt;
        energy = et;
        accepted = true;
        break;
      }
    }
    ++rep.iterations;
    if (!accepted) {
      std::ostringstream msg;
      msg << "Newton stagnated at residual " << norm << " after " << rep.iterations
          << " iterations";
      fail(msg.str());
    }
  }
  rep.converged = true;
  rep.residual_norm = norm;
  rep.history.push_back(norm);
  finish_report(*mesh, model, psi, rep);
  return {StreamField{mesh, psi}, rep};
}

}  // namespace

void SolveConfig::validate() const {
  if (!(newton_tol > 0.0)) throw std::invalid_argument("solve.newton_tol must be positive");
  if (max_newton < 1) throw std::invalid_argument("solve.max_newton must be at least 1");
  if (!(backtrack > 0.0 && backtrack < 1.0)) {
    throw std::invalid_argument("solve.backtrack must lie in (0, 1)");
  }
  if (!(min_step > 0.0 && min_step <= 1.0)) {
    throw std::invalid_argument("solve.min_step must lie in (0, 1]");
  }
  if (continuation_steps < 1) {
    throw std::invalid_argument("solve.continuation_steps must be at least 1");
  }
  if (!(linear_tol > 0.0)) throw std::invalid_argument("solve.linear_tol must be positive");
}

double cutoff_mach(const GasModel& gas, double q) {
  const double h = gas.h_cutoff(q);
  const double speed = h * std::sqrt(2.0 * q);
  return speed / std::pow(h, -0.5 * (gas.gamma() - 1.0));
}

double residual_norm(const Eigen::VectorXd& r, const Constraints& c) {
  double s = 0.0;
  for (Eigen::Index n = 0; n < r.size(); ++n) {
    if (!c.fixed[n]) s += r[n] * r[n];
  }
  return c.free_count > 0 ? std::sqrt(s / c.free_count) : 0.0;
}

SolveResult solve_incompressible(const MeshPtr& mesh, const BoundaryConditions& bcs,
                                 const SolveConfig& config) {
  config.validate();
  const auto model = FlowModel::incompressible();
  const Constraints c = apply_boundary_conditions(*mesh, bcs);
  Eigen::VectorXd psi = Eigen::VectorXd::Zero(mesh->node_count());
  impose(c, psi);

  SolveReport rep;
  Eigen::VectorXd r = assemble_residual(*mesh, model, psi, &c);
  rep.history.push_back(residual_norm(r, c));
  const SparseMatrix K = assemble_jacobian(*mesh, model, psi, &c);
  psi += linear_solve(K, -r, config);
  impose(c, psi);
  rep.iterations = 1;
  r = assemble_residual(*mesh, model, psi, &c);
  rep.residual_norm = residual_norm(r, c);
  rep.history.push_back(rep.residual_norm);
  rep.converged = rep.residual_norm <= config.newton_tol;
  if (!rep.converged) {
    finish_report(*mesh, model, psi, rep);
    throw DivergenceError("incompressible solve left residual " +
                              std::to_string(rep.residual_norm) + " above newton_tol",
                          SolveResult{StreamField{mesh, psi}, rep});
  }
  finish_report(*mesh, model, psi, rep);
  return {StreamField{mesh, psi}, rep};
}

SolveResult solve_compressible(const MeshPtr& mesh, const GasModel& gas,
                               const BoundaryConditions& bcs, const SolveConfig& config,
                               const Eigen::VectorXd* initial) {
  config.validate();
  const auto model = FlowModel::compressible(gas);
  Eigen::VectorXd psi;
  if (initial) {
    if (initial->size() != mesh->node_count()) {
      throw std::invalid_argument("initial guess does not match the mesh");
    }
    psi = *initial;
  } else {
    psi = solve_incompressible(mesh, bcs, config).field.psi;
  }

  const double target = bcs.profile.amplitude();
  const int steps = config.continuation_steps;
  SolveReport carried;
  SolveResult result;
  for (int k = 1; k <= steps; ++k) {
    BoundaryConditions stage = bcs;
    stage.profile = bcs.profile.with_amplitude(target * k / steps);
    if (k == 1 && steps > 1) psi *= 1.0 / steps;
    const Constraints c = apply_boundary_conditions(*mesh, stage);
    result = newton(mesh, model, c, psi, config, carried);
    carried.iterations = result.report.iterations;
    carried.history = result.report.history;
    psi = result.field.psi;
    if (k < steps) psi *= static_cast<double>(k + 1) / k;
  }
  return result;
}

SweepResult continuation_sweep(const MeshPtr& mesh, const GasModel& gas,
                               const BoundaryConditions& bcs, std::span<const double> amplitudes,
                               const SolveConfig& config) {
  for (std::size_t k = 1; k < amplitudes.size(); ++k) {
    if (!(amplitudes[k] > amplitudes[k - 1])) {
      throw std::invalid_argument("sweep amplitudes must be strictly ascending");
    }
  }
  SweepResult out;
  Eigen::VectorXd prev;
  double prev_amp = 0.0;
  for (double amp : amplitudes) {
    BoundaryConditions stage = bcs;
    stage.profile = bcs.profile.with_amplitude(amp);
    SolveConfig cfg = config;
    cfg.continuation_steps = 1;
    SolveResult res;
    try {
      if (prev.size() > 0 && prev_amp != 0.0) {
        Eigen::VectorXd guess = prev * (amp / prev_amp);
        res = solve_compressible(mesh, gas, stage, cfg, &guess);
      } else {
        res = solve_compressible(mesh, gas, stage, cfg);
      }
    } catch (const DivergenceError& e) {
      std::ostringstream msg;
      msg << "sweep failed at amplitude " << amp << ": " << e.what();
      throw DivergenceError(msg.str(), e.last());
    } catch (const std::runtime_error& e) {
      std::ostringstream msg;
      msg << "sweep failed at amplitude " << amp << ": " << e.what();
      throw std::runtime_error(msg.str());
    }
    out.amplitudes.push_back(amp);
    out.runs.push_back(res);
    prev = res.field.psi;
    prev_amp = amp;
    if (res.report.cutoff_active) {
      out.stopped_early = true;
      out.stop_reason = "cutoff active";
      break;
    }
    if (res.report.max_mach > gas.mach_cap()) {
      out.stopped_early = true;
      out.stop_reason = "max Mach above cap";
      break;
    }
    out.reached_amplitude = amp;
  }
  return out;
}

}  // namespace cornerflow
