// Measured quantities on computed fields: the boundary-adapted gradient map,
// its Dirichlet profile and decay, quasiconformality, far-field velocity and
// the weighted Hoelder seminorm at infinity.
#pragma once

#include <Eigen/Core>

#include <cstdint>
#include <functional>
#include <limits>
#include <span>
#include <string>
#include <utility>
#include <vector>

#include "cornerflow/discretization.hpp"
#include "cornerflow/fields.hpp"
#include "cornerflow/geometry.hpp"

namespace cornerflow {

/// f = M grad psi and f*_i = (M s_i) . f = s_i . grad psi, so f*_i vanishes on
/// the wall lam = i. Nodal gradients and their derivatives are recovered by
/// second-order differences in (ell, lam) and interpolated bilinearly to the
/// quadrature points.
struct GradientMaps {
  std::vector<Vec2> node_f;
  std::vector<Vec2> node_f_star;
  std::vector<Vec2> f;        // per quadrature point
  std::vector<Vec2> f_star;   // per quadrature point
  std::vector<Mat2> df_star;  // d f* / d (ell, lam)
  std::vector<Mat2> df;       // d f / d x
  /// max |f*_i| over nodes on the wall lam = i.
  double wall_trace = 0.0;
};

GradientMaps gradient_maps(const StripMesh& mesh, const Eigen::VectorXd& psi);

struct DirichletProfile {
  std::vector<double> ell;     // Gauss lines in ell
  std::vector<double> weight;  // Gauss weights in ell
  std::vector<double> J;       // int_0^1 |d f*|^2 d lam on each line
  double total = 0.0;          // sum J * weight
  double ell_min = 0.0;
  double ell_max = 0.0;
  int lines_per_cell = 1;
};

DirichletProfile dirichlet_profile(const StripMesh& mesh, const GradientMaps& maps);

/// Profile of a given J(ell) on n_cells cells with a Gauss rule of `order`.
DirichletProfile tabulate_profile(const std::function<double(double)>& J, double ell_min,
                                  double ell_max, int n_cells, int order);

struct DecayFit {
  double alpha = 0.0;  // half the fitted rate; +inf for an all-zero tail
  double rate = 0.0;
  double amplitude = 0.0;
  double residual = 0.0;  // RMS misfit of log tail integrals
  int samples = 0;
};

/// Fits the tail integrals T(ell) = int_ell^L J to A (e^(-k ell) - e^(-k L)) / k
/// over ell >= ell_min + burn_in and reports alpha = k / 2. Throws
/// std::invalid_argument with fewer than 8 usable samples.
DecayFit fit_decay(const DirichletProfile& profile, double burn_in);

struct Band {
  double lo = 0.0;
  double hi = 0.0;

  bool operator==(const Band&) const = default;
};

struct BandStats {
  Band band;
  double mean_speed = 0.0;  // area-weighted
  double max_speed = 0.0;
  double mean_slip0 = 0.0;  // area-weighted v . s0 / |s0|
  double mean_slip1 = 0.0;
};

struct FarfieldReport {
  std::vector<BandStats> bands;  // retained bands, outward
  int excluded = 0;
  double extrapolated = 0.0;
  bool below_threshold = false;
  double threshold = 0.0;
};

/// Aitken extrapolation of the last three values, falling back to the last
/// value for short or non-contracting sequences.
double extrapolate_limit(std::span<const double> values);

/// Unit bands [ell_min + k, ell_min + k + 1] that end at or before L - margin.
std::vector<Band> unit_bands(const StripMesh& mesh, double margin);

/// Bands ending after L - margin are dropped; an empty band is an error.
FarfieldReport farfield_velocity(const StripMesh& mesh, const FlowState& flow,
                                 std::span<const Band> bands, double margin, double threshold);

struct HolderSample {
  Vec2 x;
  Vec2 u;
};

struct HolderEstimate {
  double seminorm = 0.0;
  double alpha = 0.0;
  long pairs = 0;
};

/// max |u1 - u2| |x1 - x2|^-alpha min(|x1|, |x2|)^(2 alpha) over the first
/// `budget` pairs of a low-discrepancy sequence. Pairs are drawn over samples
/// sorted by |x| with log-uniform index offsets; coincident pairs are skipped.
HolderEstimate holder_at_infinity(std::span<const HolderSample> samples, double alpha, long budget,
                                  std::uint64_t seed);

struct QcSummary {
  double max_ratio = 1.0;
  double bound = 1.0;        // 1 / (1 - max Mach^2)
  double excess_p99 = 0.0;   // 99th percentile of max(0, ratio - bound)
  double violation_fraction = 0.0;  // ratio > bound + tolerance, among valid points
  std::size_t valid = 0;
  std::size_t degenerate = 0;
  std::size_t reversed = 0;
};

QcSummary quasiconformality(const GradientMaps& maps, double max_mach, double tolerance,
                            double det_tol = 1e-12);

struct DiagnosticsSpec {
  std::vector<Band> bands;  // empty selects unit bands
  double margin = 1.0;
  double burn_in = 1.0;
  double holder_alpha = 1.0 / 3.0;
  long pair_budget = 10000;
  std::uint64_t seed = 20240601;
  double farfield_threshold = 1e-2;
  double qc_tolerance = 0.05;

  bool operator==(const DiagnosticsSpec&) const = default;
};

struct DiagnosticsReport {
  DirichletProfile profile;
  DecayFit decay;
  bool decay_ok = false;
  std::string decay_error;
  QcSummary qc;
  FarfieldReport farfield;
  bool farfield_ok = false;
  std::string farfield_error;
  HolderEstimate holder;
  double wall_trace = 0.0;
  double max_vorticity = 0.0;
};

DiagnosticsReport run_diagnostics(const StripMesh& mesh, const Eigen::VectorXd& psi,
                                  const FlowState& flow, const DiagnosticsSpec& spec);

/// Flat key/value pairs in a fixed order with 17 significant digits.
std::vector<std::pair<std::string, std::string>> report_entries(const DiagnosticsReport& r);

/// %.17g formatting.
std::string format_number(double v);

}  // namespace cornerflow
