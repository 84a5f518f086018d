#include "cornerflow/commands.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <filesystem>
#include <iostream>
#include <mutex>
#include <thread>

#include "cornerflow/diagnostics.hpp"
#include "cornerflow/fields.hpp"
#include "cornerflow/solver.hpp"

namespace cornerflow {

namespace {

std::string flag(bool b) { return b ? "true" : "false"; }

std::string join_numbers(const std::vector<double>& v) {
  std::string out;
  for (std::size_t k = 0; k < v.size(); ++k) out += (k ? " " : "") + format_number(v[k]);
  return out;
}

std::vector<double> continuation_ladder(const ExperimentConfig& cfg) {
  std::vector<double> ladder;
  for (double a : cfg.amplitudes) {
    if (a < cfg.bcs.amplitude) ladder.push_back(a);
  }
  ladder.push_back(cfg.bcs.amplitude);
  return ladder;
}

}  // namespace

CaseOutcome run_case(const ExperimentConfig& cfg) {
  validate_config(cfg);
  const CornerDomain domain = make_domain(cfg);
  const MeshSpec spec = make_mesh_spec(cfg, domain);
  MeshPtr mesh;
  try {
    mesh = StripMesh::build(domain, spec);
  } catch (const std::exception& e) {
    throw ConfigError("mesh", e.what());
  }
  const BoundaryConditions bcs = make_bcs(cfg, domain);
  try {
    apply_boundary_conditions(*mesh, bcs);
  } catch (const std::invalid_argument& e) {
    throw ConfigError("bcs.profile", e.what());
  }
  const FlowModel model = make_model(cfg);

  CaseOutcome out;
  SolveResult res;
  std::string message;
  bool diverged = false;
  try {
    if (!model.is_compressible()) {
      res = solve_incompressible(mesh, bcs, cfg.solve);
    } else if (!cfg.amplitudes.empty()) {
      const std::vector<double> ladder = continuation_ladder(cfg);
      SweepResult sweep = continuation_sweep(mesh, model.gas(), bcs, ladder, cfg.solve);
      res = std::move(sweep.runs.back());
      if (sweep.stopped_early) message = sweep.stop_reason;
    } else {
      res = solve_compressible(mesh, model.gas(), bcs, cfg.solve);
    }
  } catch (const DivergenceError& e) {
    res = e.last();
    diverged = true;
    message = e.what();
  } catch (const std::runtime_error& e) {
    diverged = true;
    message = e.what();
    res.field = {mesh, Eigen::VectorXd::Zero(mesh->node_count())};
  }
  const SolveReport& rep = res.report;
  const Eigen::VectorXd& psi = res.field.psi;

  if (diverged || !rep.converged) {
    out.exit_code = kExitDiverged;
    out.status = "diverged";
  } else if (rep.cutoff_active) {
    out.exit_code = kExitCutoff;
    out.status = "cutoff_active";
  } else if (model.is_compressible() && rep.max_mach > model.gas().mach_cap()) {
    out.exit_code = kExitCutoff;
    out.status = "mach_above_cap";
  } else {
    out.exit_code = kExitCertified;
    out.status = "certified";
  }
  out.max_mach = rep.max_mach;

  KeyValues& kv = out.report;
  auto num = [&](const std::string& k, double v) { kv.emplace_back(k, format_number(v)); };
  kv.emplace_back("format", kReportFormat);
  kv.emplace_back("status", out.status);
  kv.emplace_back("exit_code", std::to_string(out.exit_code));
  if (!message.empty()) kv.emplace_back("message", message);
  kv.emplace_back("domain.kind", domain.spec().kind);
  num("domain.opening", domain.opening());
  num("mesh.ell_min", spec.ell_min);
  num("mesh.L", spec.ell_max);
  kv.emplace_back("mesh.n_ell", std::to_string(spec.n_ell));
  kv.emplace_back("mesh.n_lam", std::to_string(spec.n_lam));
  kv.emplace_back("gas.mode", cfg.gas.compressible ? "compressible" : "incompressible");
  kv.emplace_back("bcs.profile", cfg.bcs.profile);
  num("bcs.amplitude", cfg.bcs.amplitude);
  kv.emplace_back("solve.converged", flag(rep.converged));
  kv.emplace_back("solve.iterations", std::to_string(rep.iterations));
  num("solve.residual_norm", rep.residual_norm);
  num("solve.max_q", rep.max_q);
  kv.emplace_back("solve.cutoff_active", flag(rep.cutoff_active));
  num("solve.max_mach", rep.max_mach);
  num("solve.energy", rep.energy);
  kv.emplace_back("solve.history", join_numbers(rep.history));

  if (model.is_compressible() && !diverged && !rep.cutoff_active &&
      rep.max_q <= model.gas().q_sonic()) {
    const Constraints c = apply_boundary_conditions(*mesh, bcs);
    const Eigen::VectorXd r_cut = assemble_residual(*mesh, model, psi, &c);
    const Eigen::VectorXd r_raw = assemble_residual(*mesh, model.with_raw_coefficient(), psi, &c);
    num("certificate.raw_residual_norm", residual_norm(r_raw, c));
    num("certificate.residual_change", (r_raw - r_cut).norm());
  }

  if (bcs.profile.kind() == FarfieldProfile::Kind::Exact) {
    const auto& ref = bcs.profile.reference();
    const double a = bcs.profile.amplitude();
    const L2Error err = l2_error(*mesh, psi, [&](const Vec2& x) { return a * ref.psi(x); });
    out.l2_relative = err.relative();
    num("exact.l2_error", err.error);
    num("exact.l2_norm", err.norm);
    num("exact.l2_relative", err.relative());
  }

  const FlowState flow = reconstruct(*mesh, model, psi);
  const DiagnosticsReport diag = run_diagnostics(*mesh, psi, flow, cfg.diagnostics);
  if (!diag.farfield.bands.empty()) {
    out.band_max = diag.farfield.bands.back().max_speed;
    out.band_extrapolated = diag.farfield.extrapolated;
  }
  for (auto& e : report_entries(diag)) kv.push_back(std::move(e));

  out.field = make_field_file(*mesh, model, cfg.gas, psi);
  return out;
}

int cmd_solve(const std::string& config_path) {
  try {
    const ExperimentConfig cfg = load_config(config_path);
    CaseOutcome out = run_case(cfg);
    write_file_atomic(cfg.output.field, format_field(*out.field));
    write_file_atomic(cfg.output.report, format_report(out.report));
    std::cout << "status = " << out.status << "\n";
    return out.exit_code;
  } catch (const ConfigError& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

std::string case_path(const std::string& base, const std::string& key, std::size_t index) {
  const std::filesystem::path p(base);
  std::filesystem::path out = p.parent_path() / p.stem();
  return out.string() + "." + key + "-" + std::to_string(index) + p.extension().string();
}

std::string summary_path(const std::string& report_base) {
  const std::filesystem::path p(report_base);
  std::filesystem::path out = p.parent_path() / p.stem();
  return out.string() + ".summary" + p.extension().string();
}

int cmd_sweep(const std::string& config_path, const std::string& key,
              const std::vector<double>& values) {
  ExperimentConfig base;
  try {
    base = load_config(config_path);
    if (key != "L" && key != "amplitude" && key != "mesh") {
      throw ConfigError("sweep.key", "expected L, amplitude or mesh, got '" + key + "'");
    }
    if (values.empty()) throw ConfigError("sweep.values", "no values given");
    for (std::size_t k = 1; k < values.size(); ++k) {
      if (!(values[k] > values[k - 1])) throw ConfigError("sweep.values", "must be strictly ascending");
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  std::vector<ExperimentConfig> cases;
  try {
    const CornerDomain domain = make_domain(base);
    const MeshSpec m0 = make_mesh_spec(base, domain);
    for (std::size_t i = 0; i < values.size(); ++i) {
      ExperimentConfig c = base;
      const double v = values[i];
      if (key == "L") {
        c.mesh.ell_max = v;
        const double ratio = (v - m0.ell_min) / (m0.ell_max - m0.ell_min);
        c.mesh.n_ell = std::max(2, static_cast<int>(std::lround(m0.n_ell * ratio)));
      } else if (key == "amplitude") {
        c.bcs.amplitude = v;
      } else {
        if (v != std::floor(v) || v < 2) throw ConfigError("sweep.values", "mesh values must be integers >= 2");
        c.mesh.n_ell = static_cast<int>(v);
        c.mesh.n_lam = std::max(2, static_cast<int>(std::lround(v * m0.n_lam / m0.n_ell)));
      }
      c.output.field = case_path(base.output.field, key, i);
      c.output.report = case_path(base.output.report, key, i);
      cases.push_back(std::move(c));
    }
  } catch (const std::exception& e) {
    std::cerr << "config error: " << e.what() << "\n";
    return kExitConfig;
  }

  std::vector<CaseOutcome> outcomes(cases.size());
  std::vector<std::string> errors(cases.size());
  std::atomic<std::size_t> next{0};
  auto worker = [&] {
    for (std::size_t i = next++; i < cases.size(); i = next++) {
      try {
        outcomes[i] = run_case(cases[i]);
      } catch (const std::exception& e) {
        outcomes[i].exit_code = kExitConfig;
        outcomes[i].status = "config_error";
        errors[i] = e.what();
      }
    }
  };
  const int n_workers = std::max(1, std::min<int>(base.output.workers, static_cast<int>(cases.size())));
  std::vector<std::thread> pool;
  for (int w = 1; w < n_workers; ++w) pool.emplace_back(worker);
  worker();
  for (auto& t : pool) t.join();

  KeyValues summary;
  summary.emplace_back("format", kReportFormat);
  summary.emplace_back("sweep.key", key);
  summary.emplace_back("sweep.values", join_numbers(values));
  summary.emplace_back("sweep.cases", std::to_string(cases.size()));
  summary.emplace_back("columns", "value exit_code status max_mach band_max band_extrapolated l2_relative");
  int worst = kExitCertified;
  std::vector<double> band_max, l2, sizes;
  for (std::size_t i = 0; i < cases.size(); ++i) {
    const CaseOutcome& o = outcomes[i];
    if (!errors[i].empty()) {
      std::cerr << "case " << i << ": " << errors[i] << "\n";
    } else {
      try {
        write_file_atomic(cases[i].output.field, format_field(*o.field));
        write_file_atomic(cases[i].output.report, format_report(o.report));
      } catch (const std::exception& e) {
        std::cerr << "case " << i << ": " << e.what() << "\n";
        worst = kExitConfig;
      }
    }
    summary.emplace_back("case." + std::to_string(i),
                         format_number(values[i]) + " " + std::to_string(o.exit_code) + " " + o.status +
                             " " + format_number(o.max_mach) + " " + format_number(o.band_max) + " " +
                             format_number(o.band_extrapolated) + " " + format_number(o.l2_relative));
    if (o.exit_code == kExitConfig) worst = kExitConfig;
    else if (worst != kExitConfig && o.exit_code == kExitDiverged) worst = kExitDiverged;
    else if (worst == kExitCertified) worst = o.exit_code;
    band_max.push_back(o.band_max);
    l2.push_back(o.l2_relative);
    sizes.push_back(static_cast<double>(cases[i].mesh.n_ell));
  }

  const bool bands_ok = std::all_of(band_max.begin(), band_max.end(), [](double v) { return std::isfinite(v); });
  if (bands_ok) {
    bool decreasing = true;
    for (std::size_t k = 1; k < band_max.size(); ++k) decreasing = decreasing && band_max[k] < band_max[k - 1];
    summary.emplace_back("summary.band_max_decreasing", flag(decreasing));
    summary.emplace_back("summary.band_max_limit", format_number(extrapolate_limit(band_max)));
  }
  const bool l2_ok = l2.size() >= 2 && std::all_of(l2.begin(), l2.end(), [](double v) { return v > 0.0 && std::isfinite(v); });
  if (key == "mesh" && l2_ok) {
    // least-squares slope of log error against log mesh size
    double sx = 0, sy = 0, sxx = 0, sxy = 0;
    const double n = static_cast<double>(l2.size());
    for (std::size_t k = 0; k < l2.size(); ++k) {
      const double x = -std::log(sizes[k]), y = std::log(l2[k]);
      sx += x; sy += y; sxx += x * x; sxy += x * y;
    }
    summary.emplace_back("summary.l2_order", format_number((n * sxy - sx * sy) / (n * sxx - sx * sx)));
  }
  try {
    write_file_atomic(summary_path(base.output.report), format_report(summary));
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
  return worst;
}

FieldFile reference_field(const ReferenceOptions& opt) {
  CornerDomain domain = CornerDomain::example();
  std::function<std::pair<double, FlowSample>(const Vec2&)> eval;
  if (opt.kind == "example") {
    eval = [](const Vec2& x) {
      const ExactSample s = exact_incompressible_example(x);
      return std::pair{s.psi, FlowSample{1.0, s.v, 0.0}};
    };
  } else if (opt.kind == "wedge-mode") {
    domain = CornerDomain::wedge(opt.opening, 1.0);
    const double theta0 = domain.mid_angle() - 0.5 * opt.opening;
    eval = [&, theta0](const Vec2& x) {
      const ExactSample s = wedge_mode(x, opt.opening, theta0, opt.k, opt.amplitude);
      return std::pair{s.psi, FlowSample{1.0, s.v, 0.0}};
    };
  } else if (opt.kind == "vortex-sheet") {
    const Vec2 v(opt.vx, opt.vy);
    const double direction = v.norm() > 0.0 ? std::atan2(opt.vy, opt.vx) : 0.0;
    domain = CornerDomain::wedge(opt.opening, 1.0, direction + std::numbers::pi - 0.5 * opt.opening);
    auto sheet = std::make_shared<VortexSheetFlow>(domain, v);
    eval = [sheet](const Vec2& x) { return std::pair{sheet->psi(x), sheet->sample(x)}; };
  } else {
    throw std::invalid_argument("reference kind must be example, wedge-mode or vortex-sheet, got '" +
                                opt.kind + "'");
  }
  const MeshSpec spec{opt.ell_min, opt.ell_max, opt.n_ell, opt.n_lam, 2};
  const MeshPtr mesh = StripMesh::build(domain, spec);

  FieldFile f;
  f.domain = domain.spec();
  f.mesh = spec;
  f.gas.compressible = false;
  f.header.emplace_back("extra.reference", opt.kind);
  f.rows.resize(mesh->node_count());
  for (int i = 0; i <= spec.n_ell; ++i) {
    for (int j = 0; j <= spec.n_lam; ++j) {
      const int n = mesh->node(i, j);
      const Vec2& x = mesh->node_x(n);
      const auto [psi, s] = eval(x);
      const double ell = i == spec.n_ell ? spec.ell_max : mesh->ell(i);
      const double lam = j == spec.n_lam ? 1.0 : mesh->lam(j);
      f.rows[n] = {ell, lam, x.x(), x.y(), psi, s.v.x(), s.v.y(), s.rho, 0.0};
    }
  }
  return f;
}

int cmd_reference(const ReferenceOptions& opt) {
  try {
    write_file_atomic(opt.output, format_field(reference_field(opt)));
    return kExitCertified;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

int cmd_diagnose(const std::string& field_path, const std::string& config_path,
                 const std::string& output) {
  try {
    const ExperimentConfig cfg = load_config(config_path);
    const FieldFile f = read_field(field_path);
    const CornerDomain domain = CornerDomain::from_spec(f.domain);
    const MeshPtr mesh = StripMesh::build(domain, f.mesh);
    const FlowModel model = f.gas.compressible
                                ? FlowModel::compressible(GasModel(f.gas.gamma, f.gas.mach_cap))
                                : FlowModel::incompressible();
    const Eigen::VectorXd psi = f.psi();
    const FlowState flow = reconstruct(*mesh, model, psi);
    const DiagnosticsReport diag = run_diagnostics(*mesh, psi, flow, cfg.diagnostics);
    KeyValues kv;
    kv.emplace_back("format", kReportFormat);
    kv.emplace_back("domain.kind", f.domain.kind);
    kv.emplace_back("mesh.n_ell", std::to_string(f.mesh.n_ell));
    kv.emplace_back("mesh.n_lam", std::to_string(f.mesh.n_lam));
    kv.emplace_back("gas.mode", f.gas.compressible ? "compressible" : "incompressible");
    for (auto& e : report_entries(diag)) kv.push_back(std::move(e));
    write_file_atomic(output.empty() ? cfg.output.report : output, format_report(kv));
    return kExitCertified;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

int cmd_export(const std::string& field_path, const std::string& csv_path,
               const std::vector<double>& levels, int count) {
  try {
    const FieldFile f = read_field(field_path);
    std::vector<double> lv = levels;
    if (lv.empty()) {
      if (count < 1) throw std::invalid_argument("level count must be positive");
      double lo = f.rows.front()[4], hi = lo;
      for (const auto& r : f.rows) {
        lo = std::min(lo, r[4]);
        hi = std::max(hi, r[4]);
      }
      for (int k = 1; k <= count; ++k) lv.push_back(lo + (hi - lo) * k / (count + 1));
    }
    write_file_atomic(csv_path, format_contours_csv(contour_polylines(f, lv)));
    return kExitCertified;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << "\n";
    return kExitConfig;
  }
}

}  // namespace cornerflow
