#include "cornerflow/diagnostics.hpp"

#include <boost/math/tools/minima.hpp>

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numeric>
#include <random>
#include <stdexcept>

namespace cornerflow {

namespace {

// Second-order difference of nodal values along one grid direction.
double diff2(const Eigen::VectorXd& u, int n_last, int k, double h, auto at) {
  if (k == 0) return (-3.0 * u[at(0)] + 4.0 * u[at(1)] - u[at(2)]) / (2.0 * h);
  if (k == n_last) {
    return (3.0 * u[at(n_last)] - 4.0 * u[at(n_last - 1)] + u[at(n_last - 2)]) / (2.0 * h);
  }
  return (u[at(k + 1)] - u[at(k - 1)]) / (2.0 * h);
}

// Second-order second difference; one-sided four-point stencils at the ends.
double second_diff(const Eigen::VectorXd& u, int n_last, int k, double h, auto at) {
  const double h2 = h * h;
  if (n_last < 3) {
    const int m = std::clamp(k, 1, n_last - 1);
    return (u[at(m + 1)] - 2.0 * u[at(m)] + u[at(m - 1)]) / h2;
  }
  if (k == 0) return (2.0 * u[at(0)] - 5.0 * u[at(1)] + 4.0 * u[at(2)] - u[at(3)]) / h2;
  if (k == n_last) {
    return (2.0 * u[at(k)] - 5.0 * u[at(k - 1)] + 4.0 * u[at(k - 2)] - u[at(k - 3)]) / h2;
  }
  return (u[at(k + 1)] - 2.0 * u[at(k)] + u[at(k - 1)]) / h2;
}

}  // namespace

GradientMaps gradient_maps(const StripMesh& mesh, const Eigen::VectorXd& psi) {
  if (psi.size() != mesh.node_count()) throw std::invalid_argument("psi does not match the mesh");
  GradientMaps out;
  const int ni = mesh.n_ell(), nj = mesh.n_lam();
  const int nn = mesh.node_count();
  out.node_f.resize(nn);
  out.node_f_star.resize(nn);

  // Strip derivatives of psi, then of f = M J^-T grad_strip psi by the product rule.
  Eigen::VectorXd g_ell(nn), g_lam(nn);
  std::array<Eigen::VectorXd, 4> inv_jt;  // entries of J^-T
  for (auto& v : inv_jt) v.resize(nn);
  for (int i = 0; i <= ni; ++i) {
    for (int j = 0; j <= nj; ++j) {
      const int n = mesh.node(i, j);
      g_ell[n] = diff2(psi, ni, i, mesh.h_ell(), [&](int k) { return mesh.node(k, j); });
      g_lam[n] = diff2(psi, nj, j, mesh.h_lam(), [&](int k) { return mesh.node(i, k); });
      const Mat2 a = mesh.node_jacobian(n).inverse().transpose();
      for (int e = 0; e < 4; ++e) inv_jt[e][n] = a(e / 2, e % 2);
    }
  }

  std::vector<Mat2> node_df(nn), node_dfs(nn);
  const Mat2 flip = Eigen::Vector2d(1.0, -1.0).asDiagonal();
  for (int i = 0; i <= ni; ++i) {
    const double ell = i == ni ? mesh.spec().ell_max : mesh.ell(i);
    const BoundaryFrame frame = boundary_frame(mesh.domain(), ell, false);
    for (int j = 0; j <= nj; ++j) {
      const int n = mesh.node(i, j);
      auto along_ell = [&](int k) { return mesh.node(k, j); };
      auto along_lam = [&](int k) { return mesh.node(i, k); };
      Mat2 a, a_ell, a_lam;
      for (int e = 0; e < 4; ++e) {
        a(e / 2, e % 2) = inv_jt[e][n];
        a_ell(e / 2, e % 2) = diff2(inv_jt[e], ni, i, mesh.h_ell(), along_ell);
        a_lam(e / 2, e % 2) = diff2(inv_jt[e], nj, j, mesh.h_lam(), along_lam);
      }
      const Vec2 g(g_ell[n], g_lam[n]);
      const double s_ll = second_diff(psi, ni, i, mesh.h_ell(), along_ell);
      const double s_mm = second_diff(psi, nj, j, mesh.h_lam(), along_lam);
      const double s_lm = 0.5 * (diff2(g_lam, ni, i, mesh.h_ell(), along_ell) +
                                 diff2(g_ell, nj, j, mesh.h_lam(), along_lam));
      const Vec2 f = flip * (a * g);
      Mat2 df;
      df.col(0) = flip * (a_ell * g + a * Vec2(s_ll, s_lm));
      df.col(1) = flip * (a_lam * g + a * Vec2(s_lm, s_mm));
      out.node_f[n] = f;
      out.node_f_star[n] = frame.B.transpose() * f;
      node_df[n] = df;
      node_dfs[n] = frame.B.transpose() * df;
      node_dfs[n].col(0) += frame.dB.transpose() * f;
    }
    out.wall_trace = std::max({out.wall_trace, std::abs(out.node_f_star[mesh.node(i, 0)].x()),
                               std::abs(out.node_f_star[mesh.node(i, nj)].y())});
  }

  const auto qps = mesh.quad_points();
  out.f.reserve(qps.size());
  out.f_star.reserve(qps.size());
  out.df_star.reserve(qps.size());
  out.df.reserve(qps.size());
  for (int c = 0; c < mesh.cell_count(); ++c) {
    const auto nodes = mesh.cell_nodes(c);
    for (const auto& qp : mesh.cell_quad_points(c)) {
      const auto& phi = mesh.basis(qp.local);
      Vec2 fq = Vec2::Zero(), fsq = Vec2::Zero();
      Mat2 dfq = Mat2::Zero(), dfsq = Mat2::Zero();
      for (int a = 0; a < 4; ++a) {
        fq += phi[a] * out.node_f[nodes[a]];
        fsq += phi[a] * out.node_f_star[nodes[a]];
        dfq += phi[a] * node_df[nodes[a]];
        dfsq += phi[a] * node_dfs[nodes[a]];
      }
      out.f.push_back(fq);
      out.f_star.push_back(fsq);
      out.df_star.push_back(dfsq);
      out.df.push_back(dfq * qp.inv_jacobian_t.transpose());
    }
  }
  return out;
}

DirichletProfile dirichlet_profile(const StripMesh& mesh, const GradientMaps& maps) {
  std::vector<double> gx, gw;
  StripMesh::gauss_rule(mesh.spec().quad_order, gx, gw);
  const int nq = mesh.spec().quad_order;
  DirichletProfile p;
  p.ell_min = mesh.spec().ell_min;
  p.ell_max = mesh.spec().ell_max;
  p.lines_per_cell = nq;
  const int lines = mesh.n_ell() * nq;
  p.ell.resize(lines);
  p.weight.resize(lines);
  p.J.assign(lines, 0.0);
  for (int i = 0; i < mesh.n_ell(); ++i) {
    for (int a = 0; a < nq; ++a) {
      p.ell[i * nq + a] = mesh.ell(i) + gx[a] * mesh.h_ell();
      p.weight[i * nq + a] = gw[a] * mesh.h_ell();
    }
  }
  const auto qps = mesh.quad_points();
  for (std::size_t k = 0; k < qps.size(); ++k) {
    const int i = qps[k].cell / mesh.n_lam();
    const int line = i * nq + qps[k].local / nq;
    p.J[line] += qps[k].strip_weight * maps.df_star[k].squaredNorm() / p.weight[line];
  }
  for (int l = 0; l < lines; ++l) p.total += p.J[l] * p.weight[l];
  return p;
}

DirichletProfile tabulate_profile(const std::function<double(double)>& J, double ell_min,
                                  double ell_max, int n_cells, int order) {
  std::vector<double> gx, gw;
  StripMesh::gauss_rule(order, gx, gw);
  DirichletProfile p;
  p.ell_min = ell_min;
  p.ell_max = ell_max;
  p.lines_per_cell = order;
  const double h = (ell_max - ell_min) / n_cells;
  for (int i = 0; i < n_cells; ++i) {
    for (int a = 0; a < order; ++a) {
      const double ell = ell_min + (i + gx[a]) * h;
      p.ell.push_back(ell);
      p.weight.push_back(gw[a] * h);
      p.J.push_back(J(ell));
      p.total += p.J.back() * p.weight.back();
    }
  }
  return p;
}

namespace {

// log of (e^(-k ell) - e^(-k L)) / k, continuous through k = 0.
double log_tail_model(double k, double ell, double L) {
  const double d = L - ell;
  if (std::abs(k * d) < 1e-12) return -k * ell + std::log(d);
  return -k * ell + std::log(-std::expm1(-k * d) / k);
}

}  // namespace

DecayFit fit_decay(const DirichletProfile& profile, double burn_in) {
  const int lines = static_cast<int>(profile.J.size());
  const int per = std::max(1, profile.lines_per_cell);
  if (lines % per != 0) throw std::invalid_argument("profile lines do not fill whole cells");
  const int cells = lines / per;
  const double h = (profile.ell_max - profile.ell_min) / cells;

  // Tail integrals at the cell boundaries.
  std::vector<double> tail(cells + 1, 0.0);
  for (int c = cells - 1; c >= 0; --c) {
    double s = 0.0;
    for (int a = 0; a < per; ++a) s += profile.J[c * per + a] * profile.weight[c * per + a];
    tail[c] = tail[c + 1] + s;
  }
  std::vector<double> xs, ys;
  bool any_positive = false;
  for (int i = 0; i < cells; ++i) {
    const double ell = profile.ell_min + i * h;
    if (ell < profile.ell_min + burn_in - 1e-12) continue;
    if (tail[i] > 0.0) {
      any_positive = true;
      xs.push_back(ell);
      ys.push_back(std::log(tail[i]));
    }
  }
  DecayFit fit;
  if (!any_positive) {
    fit.alpha = fit.rate = std::numeric_limits<double>::infinity();
    return fit;
  }
  if (xs.size() < 8) {
    throw std::invalid_argument("decay fit needs at least 8 samples beyond burn-in, got " +
                                std::to_string(xs.size()));
  }
  const double L = profile.ell_max;
  const double n = static_cast<double>(xs.size());
  auto log_amplitude = [&](double k) {
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) s += ys[i] - log_tail_model(k, xs[i], L);
    return s / n;
  };
  auto sse = [&](double k) {
    const double la = log_amplitude(k);
    double s = 0.0;
    for (std::size_t i = 0; i < xs.size(); ++i) {
      const double e = ys[i] - la - log_tail_model(k, xs[i], L);
      s += e * e;
    }
    return s;
  };
  // Coarse scan, then Brent inside the best bracket.
  const double k_lo = -5.0, k_hi = 25.0, step = 0.05;
  double best_k = k_lo, best = sse(k_lo);
  for (double k = k_lo + step; k <= k_hi + 1e-12; k += step) {
    const double v = sse(k);
    if (v < best) {
      best = v;
      best_k = k;
    }
  }
  const auto [k, value] =
      boost::math::tools::brent_find_minima(sse, best_k - step, best_k + step, 52);
  fit.rate = k;
  fit.alpha = 0.5 * k;
  fit.amplitude = std::exp(log_amplitude(k));
  fit.residual = std::sqrt(value / n);
  fit.samples = static_cast<int>(xs.size());
  return fit;
}

double extrapolate_limit(std::span<const double> values) {
  if (values.empty()) throw std::invalid_argument("nothing to extrapolate");
  const std::size_t n = values.size();
  const double last = values[n - 1];
  if (n < 3) return last;
  const double x0 = values[n - 3], x1 = values[n - 2], x2 = values[n - 1];
  const double d1 = x1 - x0, d2 = x2 - x1;
  const double denom = d2 - d1;
  if (denom == 0.0 || d1 == 0.0 || !(std::abs(d2 / d1) < 1.0)) return last;
  double lim = x2 - d2 * d2 / denom;
  if (!std::isfinite(lim)) return last;
  const bool nonnegative = std::all_of(values.begin(), values.end(), [](double v) { return v >= 0.0; });
  if (nonnegative) lim = std::max(0.0, lim);
  return lim;
}

std::vector<Band> unit_bands(const StripMesh& mesh, double margin) {
  std::vector<Band> bands;
  const double l0 = mesh.spec().ell_min, L = mesh.spec().ell_max;
  for (int k = 0; l0 + k + 1 <= L - margin + 1e-12; ++k) bands.push_back({l0 + k, l0 + k + 1});
  return bands;
}

FarfieldReport farfield_velocity(const StripMesh& mesh, const FlowState& flow,
                                 std::span<const Band> bands, double margin, double threshold) {
  if (margin < 1.0) throw std::invalid_argument("far-field margin must be at least 1");
  FarfieldReport out;
  out.threshold = threshold;
  const double limit = mesh.spec().ell_max - margin + 1e-12;
  for (const Band& b : bands) {
    if (!(b.lo < b.hi)) throw std::invalid_argument("far-field band with lo >= hi");
    if (b.hi > limit) {
      ++out.excluded;
      continue;
    }
    BandStats st;
    st.band = b;
    double area = 0.0;
    for (std::size_t k = 0; k < flow.x.size(); ++k) {
      const double ell = flow.strip[k].ell;
      if (ell < b.lo || ell >= b.hi) continue;
      const double w = flow.weight[k];
      const double speed = flow.v[k].norm();
      const BoundaryFrame frame = boundary_frame(mesh.domain(), ell, false);
      area += w;
      st.mean_speed += w * speed;
      st.max_speed = std::max(st.max_speed, speed);
      st.mean_slip0 += w * flow.v[k].dot(frame.s0.normalized());
      st.mean_slip1 += w * flow.v[k].dot(frame.s1.normalized());
    }
    if (area == 0.0) {
      throw std::invalid_argument("far-field band [" + std::to_string(b.lo) + ", " +
                                  std::to_string(b.hi) + "] contains no samples");
    }
    st.mean_speed /= area;
    st.mean_slip0 /= area;
    st.mean_slip1 /= area;
    out.bands.push_back(st);
  }
  if (out.bands.empty()) throw std::invalid_argument("no far-field band left inside the margin");
  std::vector<double> maxima;
  for (const auto& st : out.bands) maxima.push_back(st.max_speed);
  out.extrapolated = extrapolate_limit(maxima);
  out.below_threshold = out.extrapolated <= threshold;
  return out;
}

HolderEstimate holder_at_infinity(std::span<const HolderSample> samples, double alpha, long budget,
                                  std::uint64_t seed) {
  if (!(alpha > 0.0 && alpha < 1.0)) throw std::invalid_argument("Hoelder exponent must lie in (0, 1)");
  HolderEstimate est;
  est.alpha = alpha;
  const long n = static_cast<long>(samples.size());
  if (n < 2 || budget <= 0) return est;
  std::vector<long> order(n);
  std::iota(order.begin(), order.end(), 0L);
  std::stable_sort(order.begin(), order.end(), [&](long a, long b) {
    return samples[a].x.squaredNorm() < samples[b].x.squaredNorm();
  });

  // R2 low-discrepancy sequence with a seeded shift.
  std::mt19937_64 gen(seed);
  const double shift1 = static_cast<double>(gen() >> 11) * 0x1p-53;
  const double shift2 = static_cast<double>(gen() >> 11) * 0x1p-53;
  const double g = 1.32471795724474602596;
  const double a1 = 1.0 / g, a2 = 1.0 / (g * g);
  const double log_n = std::log(static_cast<double>(n));
  for (long p = 1; p <= budget; ++p) {
    const double u1 = std::fmod(shift1 + p * a1, 1.0);
    const double u2 = std::fmod(shift2 + p * a2, 1.0);
    const long i = std::min(n - 1, static_cast<long>(u1 * n));
    const long d = std::clamp(static_cast<long>(std::exp(u2 * log_n)), 1L, n - 1);
    const long j = (i + d) % n;
    ++est.pairs;
    const auto& s1 = samples[order[i]];
    const auto& s2 = samples[order[j]];
    const double dist = (s1.x - s2.x).norm();
    if (dist == 0.0) continue;
    const double rmin = std::min(s1.x.norm(), s2.x.norm());
    const double quotient =
        (s1.u - s2.u).norm() * std::pow(dist, -alpha) * std::pow(rmin, 2.0 * alpha);
    est.seminorm = std::max(est.seminorm, quotient);
  }
  return est;
}

QcSummary quasiconformality(const GradientMaps& maps, double max_mach, double tolerance,
                            double det_tol) {
  QcSummary s;
  if (!(max_mach >= 0.0 && max_mach < 1.0)) {
    throw std::invalid_argument("quasiconformality bound needs max Mach in [0, 1)");
  }
  s.bound = 1.0 / (1.0 - max_mach * max_mach);
  const auto rep = quasiconformality_ratio(maps.df, det_tol);
  s.max_ratio = rep.max_ratio;
  s.valid = rep.valid;
  s.degenerate = rep.degenerate;
  s.reversed = rep.reversed;
  std::vector<double> excess;
  std::size_t violations = 0;
  for (std::size_t k = 0; k < rep.ratio.size(); ++k) {
    if (rep.status[k] != QcStatus::Valid) continue;
    excess.push_back(std::max(0.0, rep.ratio[k] - s.bound));
    if (rep.ratio[k] > s.bound + tolerance) ++violations;
  }
  if (!excess.empty()) {
    const std::size_t idx =
        static_cast<std::size_t>(std::ceil(0.99 * static_cast<double>(excess.size()))) - 1;
    std::nth_element(excess.begin(), excess.begin() + idx, excess.end());
    s.excess_p99 = excess[idx];
    s.violation_fraction = static_cast<double>(violations) / static_cast<double>(excess.size());
  }
  return s;
}

DiagnosticsReport run_diagnostics(const StripMesh& mesh, const Eigen::VectorXd& psi,
                                  const FlowState& flow, const DiagnosticsSpec& spec) {
  DiagnosticsReport r;
  const GradientMaps maps = gradient_maps(mesh, psi);
  r.wall_trace = maps.wall_trace;
  r.profile = dirichlet_profile(mesh, maps);
  try {
    r.decay = fit_decay(r.profile, spec.burn_in);
    r.decay_ok = true;
  } catch (const std::invalid_argument& e) {
    r.decay_ok = false;
    r.decay_error = e.what();
  }
  double max_mach = 0.0;
  for (double m : flow.mach) max_mach = std::max(max_mach, m);
  r.qc = quasiconformality(maps, std::min(max_mach, 1.0 - 1e-12), spec.qc_tolerance);

  const std::vector<Band> bands = spec.bands.empty() ? unit_bands(mesh, spec.margin) : spec.bands;
  try {
    r.farfield = farfield_velocity(mesh, flow, bands, spec.margin, spec.farfield_threshold);
    r.farfield_ok = true;
  } catch (const std::invalid_argument& e) {
    r.farfield.threshold = spec.farfield_threshold;
    r.farfield_error = e.what();
  }

  std::vector<HolderSample> samples(flow.x.size());
  for (std::size_t k = 0; k < flow.x.size(); ++k) samples[k] = {flow.x[k], flow.v[k]};
  r.holder = holder_at_infinity(samples, spec.holder_alpha, spec.pair_budget, spec.seed);

  for (double w : flow.vorticity) r.max_vorticity = std::max(r.max_vorticity, std::abs(w));
  return r;
}

std::string format_number(double v) {
  char buf[64];
  std::snprintf(buf, sizeof buf, "%.17g", v);
  return buf;
}

std::vector<std::pair<std::string, std::string>> report_entries(const DiagnosticsReport& r) {
  std::vector<std::pair<std::string, std::string>> kv;
  auto num = [&](std::string key, double v) { kv.emplace_back(std::move(key), format_number(v)); };
  auto cnt = [&](std::string key, long long v) { kv.emplace_back(std::move(key), std::to_string(v)); };
  auto flag = [&](std::string key, bool v) { kv.emplace_back(std::move(key), v ? "true" : "false"); };

  num("dirichlet.total", r.profile.total);
  cnt("dirichlet.lines", static_cast<long long>(r.profile.J.size()));
  flag("decay.ok", r.decay_ok);
  num("decay.alpha", r.decay.alpha);
  num("decay.rate", r.decay.rate);
  num("decay.amplitude", r.decay.amplitude);
  num("decay.residual", r.decay.residual);
  cnt("decay.samples", r.decay.samples);
  num("qc.max_ratio", r.qc.max_ratio);
  num("qc.bound", r.qc.bound);
  num("qc.excess_p99", r.qc.excess_p99);
  num("qc.violation_fraction", r.qc.violation_fraction);
  cnt("qc.valid", static_cast<long long>(r.qc.valid));
  cnt("qc.degenerate", static_cast<long long>(r.qc.degenerate));
  cnt("qc.reversed", static_cast<long long>(r.qc.reversed));
  flag("farfield.ok", r.farfield_ok);
  cnt("farfield.bands", static_cast<long long>(r.farfield.bands.size()));
  cnt("farfield.excluded", r.farfield.excluded);
  for (std::size_t k = 0; k < r.farfield.bands.size(); ++k) {
    const auto& b = r.farfield.bands[k];
    const std::string p = "farfield.band." + std::to_string(k) + ".";
    num(p + "lo", b.band.lo);
    num(p + "hi", b.band.hi);
    num(p + "mean_speed", b.mean_speed);
    num(p + "max_speed", b.max_speed);
    num(p + "mean_slip0", b.mean_slip0);
    num(p + "mean_slip1", b.mean_slip1);
  }
  num("farfield.extrapolated", r.farfield.extrapolated);
  num("farfield.threshold", r.farfield.threshold);
  flag("farfield.below_threshold", r.farfield.below_threshold);
  num("holder.alpha", r.holder.alpha);
  cnt("holder.pairs", r.holder.pairs);
  num("holder.seminorm", r.holder.seminorm);
  num("wall_trace", r.wall_trace);
  num("max_vorticity", r.max_vorticity);
  for (std::size_t k = 0; k < r.profile.J.size(); ++k) {
    kv.emplace_back("dirichlet.J." + std::to_string(k),
                    format_number(r.profile.ell[k]) + " " + format_number(r.profile.weight[k]) +
                        " " + format_number(r.profile.J[k]));
  }
  return kv;
}

}  // namespace cornerflow
