#include "cornerflow/config.hpp"

#include <cmath>
#include <fstream>
#include <functional>
#include <numbers>
#include <sstream>

#include "cornerflow/fields.hpp"

namespace cornerflow {

namespace {

std::string trim(const std::string& s) {
  const auto b = s.find_first_not_of(" \t\r");
  if (b == std::string::npos) return {};
  const auto e = s.find_last_not_of(" \t\r");
  return s.substr(b, e - b + 1);
}

std::vector<std::string> split_array(const std::string& key, const std::string& text) {
  const std::string t = trim(text);
  if (t.size() < 2 || t.front() != '[' || t.back() != ']') {
    throw ConfigError(key, "expected an array like [1, 2, 3], got '" + text + "'");
  }
  std::vector<std::string> items;
  std::stringstream ss(t.substr(1, t.size() - 2));
  std::string item;
  while (std::getline(ss, item, ',')) {
    item = trim(item);
    if (!item.empty()) items.push_back(item);
  }
  return items;
}

std::string num(double v) { return format_number(v); }

std::string join(const std::vector<double>& v) {
  std::string s = "[";
  for (std::size_t k = 0; k < v.size(); ++k) s += (k ? ", " : "") + num(v[k]);
  return s + "]";
}

// Typed readers keyed by "section.key".
struct Reader {
  const IniDocument& doc;

  double real(const std::string& key, const std::string& text) const {
    try {
      return parse_number(text);
    } catch (const std::invalid_argument&) {
      throw ConfigError(key, "expected a number, got '" + text + "'");
    }
  }
  long long integer(const std::string& key, const std::string& text) const {
    std::size_t pos = 0;
    long long v = 0;
    try {
      v = std::stoll(text, &pos);
    } catch (const std::exception&) {
      pos = 0;
    }
    if (pos == 0 || pos != text.size()) throw ConfigError(key, "expected an integer, got '" + text + "'");
    return v;
  }
  bool boolean(const std::string& key, const std::string& text) const {
    if (text == "true") return true;
    if (text == "false") return false;
    throw ConfigError(key, "expected true or false, got '" + text + "'");
  }
  std::vector<double> reals(const std::string& key, const std::string& text) const {
    std::vector<double> out;
    for (const auto& item : split_array(key, text)) out.push_back(real(key, item));
    return out;
  }
};

using Handler = std::function<void(const std::string& key, const std::string& value)>;

}  // namespace

double parse_number(const std::string& text) {
  const std::string t = trim(text);
  const auto pos = t.find("pi");
  auto plain = [](const std::string& s) {
    std::size_t used = 0;
    const double v = std::stod(s, &used);
    if (used != s.size()) throw std::invalid_argument("trailing characters");
    return v;
  };
  try {
    if (pos == std::string::npos) return plain(t);
    const std::string coef = t.substr(0, pos);
    std::string rest = t.substr(pos + 2);
    double v = std::numbers::pi;
    if (!coef.empty()) v *= coef == "-" ? -1.0 : plain(coef);
    if (!rest.empty()) {
      if (rest.front() != '/') throw std::invalid_argument("bad pi expression");
      v /= plain(rest.substr(1));
    }
    return v;
  } catch (const std::exception&) {
    throw std::invalid_argument("not a number: '" + text + "'");
  }
}

IniDocument parse_ini(const std::string& text) {
  IniDocument doc;
  std::stringstream ss(text);
  std::string line, section;
  int lineno = 0;
  while (std::getline(ss, line)) {
    ++lineno;
    const std::string t = trim(line);
    if (t.empty() || t[0] == '#' || t[0] == ';') continue;
    if (t.front() == '[') {
      if (t.back() != ']') throw ConfigError("", "line " + std::to_string(lineno) + ": bad section header");
      section = trim(t.substr(1, t.size() - 2));
      doc[section];
      continue;
    }
    const auto eq = t.find('=');
    if (eq == std::string::npos) {
      throw ConfigError("", "line " + std::to_string(lineno) + ": expected key = value");
    }
    const std::string key = trim(t.substr(0, eq));
    std::string value = trim(t.substr(eq + 1));
    const auto hash = value.find(" #");
    if (hash != std::string::npos) value = trim(value.substr(0, hash));
    if (section.empty()) throw ConfigError(key, "key outside of any section");
    if (doc[section].count(key)) throw ConfigError(section + "." + key, "duplicate key");
    doc[section][key] = value;
  }
  return doc;
}

ExperimentConfig parse_config(const std::string& text) {
  const IniDocument doc = parse_ini(text);
  ExperimentConfig cfg;
  Reader rd{doc};
  std::map<std::string, std::map<std::string, Handler>> table;

  auto& d = table["domain"];
  d["kind"] = [&](auto&, auto& v) { cfg.domain.kind = v; };
  d["opening"] = [&](auto& k, auto& v) { cfg.domain.opening = rd.real(k, v); };
  d["r_min"] = [&](auto& k, auto& v) { cfg.domain.r_min = rd.real(k, v); };
  d["rotation"] = [&](auto& k, auto& v) { cfg.domain.rotation = rd.real(k, v); };
  d["inner_opening"] = [&](auto& k, auto& v) { cfg.domain.inner_opening = rd.real(k, v); };
  d["blend_scale"] = [&](auto& k, auto& v) { cfg.domain.blend_scale = rd.real(k, v); };
  d["blend_center"] = [&](auto& k, auto& v) { cfg.domain.blend_center = rd.real(k, v); };

  auto& g = table["gas"];
  g["mode"] = [&](auto& k, auto& v) {
    if (v == "compressible") cfg.gas.compressible = true;
    else if (v == "incompressible") cfg.gas.compressible = false;
    else throw ConfigError(k, "expected compressible or incompressible, got '" + v + "'");
  };
  g["gamma"] = [&](auto& k, auto& v) { cfg.gas.gamma = rd.real(k, v); };
  g["mach_cap"] = [&](auto& k, auto& v) { cfg.gas.mach_cap = rd.real(k, v); };

  auto& m = table["mesh"];
  m["ell_min"] = [&](auto& k, auto& v) {
    cfg.ell_min_auto = v == "auto";
    if (!cfg.ell_min_auto) cfg.mesh.ell_min = rd.real(k, v);
  };
  m["L"] = [&](auto& k, auto& v) { cfg.mesh.ell_max = rd.real(k, v); };
  m["n_ell"] = [&](auto& k, auto& v) { cfg.mesh.n_ell = static_cast<int>(rd.integer(k, v)); };
  m["n_lam"] = [&](auto& k, auto& v) { cfg.mesh.n_lam = static_cast<int>(rd.integer(k, v)); };
  m["quad_order"] = [&](auto& k, auto& v) { cfg.mesh.quad_order = static_cast<int>(rd.integer(k, v)); };

  auto& b = table["bcs"];
  b["profile"] = [&](auto&, auto& v) { cfg.bcs.profile = v; };
  b["amplitude"] = [&](auto& k, auto& v) { cfg.bcs.amplitude = rd.real(k, v); };
  b["k"] = [&](auto& k, auto& v) { cfg.bcs.k = static_cast<int>(rd.integer(k, v)); };
  b["reference"] = [&](auto&, auto& v) { cfg.bcs.reference = v; };
  b["inner"] = [&](auto&, auto& v) { cfg.bcs.inner = v; };

  auto& s = table["solve"];
  s["newton_tol"] = [&](auto& k, auto& v) { cfg.solve.newton_tol = rd.real(k, v); };
  s["max_newton"] = [&](auto& k, auto& v) { cfg.solve.max_newton = static_cast<int>(rd.integer(k, v)); };
  s["backtrack"] = [&](auto& k, auto& v) { cfg.solve.backtrack = rd.real(k, v); };
  s["min_step"] = [&](auto& k, auto& v) { cfg.solve.min_step = rd.real(k, v); };
  s["continuation_steps"] = [&](auto& k, auto& v) {
    cfg.solve.continuation_steps = static_cast<int>(rd.integer(k, v));
  };
  s["linear_tol"] = [&](auto& k, auto& v) { cfg.solve.linear_tol = rd.real(k, v); };
  s["linear"] = [&](auto& k, auto& v) {
    if (v == "direct") cfg.solve.linear = LinearSolver::Direct;
    else if (v == "cg") cfg.solve.linear = LinearSolver::ConjugateGradient;
    else throw ConfigError(k, "expected direct or cg, got '" + v + "'");
  };
  s["amplitudes"] = [&](auto& k, auto& v) { cfg.amplitudes = rd.reals(k, v); };

  auto& x = table["diagnostics"];
  x["band_edges"] = [&](auto& k, auto& v) {
    const auto edges = rd.reals(k, v);
    cfg.diagnostics.bands.clear();
    if (edges.size() == 1) throw ConfigError(k, "needs at least two edges");
    for (std::size_t i = 0; i + 1 < edges.size(); ++i) {
      cfg.diagnostics.bands.push_back({edges[i], edges[i + 1]});
    }
  };
  x["margin"] = [&](auto& k, auto& v) { cfg.diagnostics.margin = rd.real(k, v); };
  x["burn_in"] = [&](auto& k, auto& v) { cfg.diagnostics.burn_in = rd.real(k, v); };
  x["holder_alpha"] = [&](auto& k, auto& v) { cfg.diagnostics.holder_alpha = rd.real(k, v); };
  x["pair_budget"] = [&](auto& k, auto& v) { cfg.diagnostics.pair_budget = static_cast<long>(rd.integer(k, v)); };
  x["seed"] = [&](auto& k, auto& v) {
    const long long sd = rd.integer(k, v);
    if (sd < 0) throw ConfigError(k, "seed must be non-negative");
    cfg.diagnostics.seed = static_cast<std::uint64_t>(sd);
  };
  x["farfield_threshold"] = [&](auto& k, auto& v) { cfg.diagnostics.farfield_threshold = rd.real(k, v); };
  x["qc_tolerance"] = [&](auto& k, auto& v) { cfg.diagnostics.qc_tolerance = rd.real(k, v); };

  auto& o = table["output"];
  o["field"] = [&](auto&, auto& v) { cfg.output.field = v; };
  o["report"] = [&](auto&, auto& v) { cfg.output.report = v; };
  o["workers"] = [&](auto& k, auto& v) { cfg.output.workers = static_cast<int>(rd.integer(k, v)); };

  for (const auto& [section, entries] : doc) {
    const auto sec = table.find(section);
    if (sec == table.end()) throw ConfigError(section, "unknown section");
    for (const auto& [key, value] : entries) {
      const auto h = sec->second.find(key);
      const std::string full = section + "." + key;
      if (h == sec->second.end()) throw ConfigError(full, "unknown key");
      h->second(full, value);
    }
  }
  validate_config(cfg);
  return cfg;
}

ExperimentConfig load_config(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw ConfigError("", "cannot read config file '" + path + "'");
  std::stringstream ss;
  ss << in.rdbuf();
  return parse_config(ss.str());
}

std::string serialize_config(const ExperimentConfig& c) {
  std::ostringstream out;
  out << "[domain]\n"
      << "kind = " << c.domain.kind << "\n"
      << "opening = " << num(c.domain.opening) << "\n"
      << "r_min = " << num(c.domain.r_min) << "\n"
      << "rotation = " << num(c.domain.rotation) << "\n"
      << "inner_opening = " << num(c.domain.inner_opening) << "\n"
      << "blend_scale = " << num(c.domain.blend_scale) << "\n"
      << "blend_center = " << num(c.domain.blend_center) << "\n\n"
      << "[gas]\n"
      << "mode = " << (c.gas.compressible ? "compressible" : "incompressible") << "\n"
      << "gamma = " << num(c.gas.gamma) << "\n"
      << "mach_cap = " << num(c.gas.mach_cap) << "\n\n"
      << "[mesh]\n"
      << "ell_min = " << (c.ell_min_auto ? std::string("auto") : num(c.mesh.ell_min)) << "\n"
      << "L = " << num(c.mesh.ell_max) << "\n"
      << "n_ell = " << c.mesh.n_ell << "\n"
      << "n_lam = " << c.mesh.n_lam << "\n"
      << "quad_order = " << c.mesh.quad_order << "\n\n"
      << "[bcs]\n"
      << "profile = " << c.bcs.profile << "\n"
      << "amplitude = " << num(c.bcs.amplitude) << "\n"
      << "k = " << c.bcs.k << "\n"
      << "reference = " << c.bcs.reference << "\n"
      << "inner = " << c.bcs.inner << "\n\n"
      << "[solve]\n"
      << "newton_tol = " << num(c.solve.newton_tol) << "\n"
      << "max_newton = " << c.solve.max_newton << "\n"
      << "backtrack = " << num(c.solve.backtrack) << "\n"
      << "min_step = " << num(c.solve.min_step) << "\n"
      << "continuation_steps = " << c.solve.continuation_steps << "\n"
      << "linear_tol = " << num(c.solve.linear_tol) << "\n"
      << "linear = " << (c.solve.linear == LinearSolver::Direct ? "direct" : "cg") << "\n"
      << "amplitudes = " << join(c.amplitudes) << "\n\n"
      << "[diagnostics]\n";
  if (!c.diagnostics.bands.empty()) {
    // Bands written as edges must be contiguous.
    std::vector<double> edges{c.diagnostics.bands.front().lo};
    for (const auto& b : c.diagnostics.bands) edges.push_back(b.hi);
    out << "band_edges = " << join(edges) << "\n";
  }
  out << "margin = " << num(c.diagnostics.margin) << "\n"
      << "burn_in = " << num(c.diagnostics.burn_in) << "\n"
      << "holder_alpha = " << num(c.diagnostics.holder_alpha) << "\n"
      << "pair_budget = " << c.diagnostics.pair_budget << "\n"
      << "seed = " << c.diagnostics.seed << "\n"
      << "farfield_threshold = " << num(c.diagnostics.farfield_threshold) << "\n"
      << "qc_tolerance = " << num(c.diagnostics.qc_tolerance) << "\n\n"
      << "[output]\n"
      << "field = " << c.output.field << "\n"
      << "report = " << c.output.report << "\n"
      << "workers = " << c.output.workers << "\n";
  return out.str();
}

CornerDomain make_domain(const ExperimentConfig& cfg) {
  try {
    return CornerDomain::from_spec(cfg.domain);
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    std::string key = "domain.opening";
    if (what.find("unknown kind") != std::string::npos) key = "domain.kind";
    else if (what.find("r_min") != std::string::npos) key = "domain.r_min";
    else if (what.find("blend_scale") != std::string::npos) key = "domain.blend_scale";
    else if (what.find("inner_opening") != std::string::npos) key = "domain.inner_opening";
    throw ConfigError(key, what);
  }
}

MeshSpec make_mesh_spec(const ExperimentConfig& cfg, const CornerDomain& domain) {
  MeshSpec m = cfg.mesh;
  if (cfg.ell_min_auto) m.ell_min = domain.log_r_min();
  return m;
}

BoundaryConditions make_bcs(const ExperimentConfig& cfg, const CornerDomain& domain) {
  BoundaryConditions bcs;
  bcs.inner = cfg.bcs.inner == "natural" ? InnerBoundary::Natural : InnerBoundary::Dirichlet;
  if (cfg.bcs.profile == "uniform_flux") {
    bcs.profile = FarfieldProfile::uniform_flux(cfg.bcs.amplitude);
  } else if (cfg.bcs.profile == "mode") {
    bcs.profile = FarfieldProfile::mode(cfg.bcs.k, cfg.bcs.amplitude);
  } else if (cfg.bcs.reference == "example") {
    bcs.profile = FarfieldProfile::exact(example_reference(), cfg.bcs.amplitude);
  } else {
    const double theta0 = domain.mid_angle() - 0.5 * domain.opening();
    bcs.profile = FarfieldProfile::exact(
        wedge_mode_reference(domain.opening(), theta0, cfg.bcs.k), cfg.bcs.amplitude);
  }
  return bcs;
}

FlowModel make_model(const ExperimentConfig& cfg) {
  if (!cfg.gas.compressible) return FlowModel::incompressible();
  return FlowModel::compressible(GasModel(cfg.gas.gamma, cfg.gas.mach_cap));
}

void validate_config(const ExperimentConfig& cfg) {
  const CornerDomain domain = make_domain(cfg);

  if (cfg.gas.compressible) {
    try {
      GasModel gas(cfg.gas.gamma, cfg.gas.mach_cap);
    } catch (const std::invalid_argument& e) {
      const std::string what = e.what();
      throw ConfigError(what.find("gamma") != std::string::npos ? "gas.gamma" : "gas.mach_cap", what);
    }
  }

  const MeshSpec mesh = make_mesh_spec(cfg, domain);
  if (mesh.n_ell < 2) throw ConfigError("mesh.n_ell", "must be at least 2");
  if (mesh.n_lam < 2) throw ConfigError("mesh.n_lam", "must be at least 2");
  if (mesh.quad_order < 2 || mesh.quad_order > 4) throw ConfigError("mesh.quad_order", "must be 2, 3 or 4");
  if (!(mesh.ell_max > mesh.ell_min)) throw ConfigError("mesh.L", "must exceed ell_min");
  if (mesh.ell_min < domain.log_r_min()) {
    throw ConfigError("mesh.ell_min", "lies below the domain start log r_min = " +
                                          format_number(domain.log_r_min()));
  }
  try {
    const auto r = strip_map(domain, {mesh.ell_min, 0.5});
    if (!(r.jacobian.determinant() > 0.0)) throw std::domain_error("degenerate map");
  } catch (const std::exception& e) {
    throw ConfigError("mesh.ell_min", std::string("strip map is singular there (") + e.what() + ")");
  }

  const auto& b = cfg.bcs;
  if (b.profile != "uniform_flux" && b.profile != "mode" && b.profile != "exact") {
    throw ConfigError("bcs.profile", "expected uniform_flux, mode or exact, got '" + b.profile + "'");
  }
  if (b.inner != "dirichlet" && b.inner != "natural") {
    throw ConfigError("bcs.inner", "expected dirichlet or natural, got '" + b.inner + "'");
  }
  if (b.k < 1) throw ConfigError("bcs.k", "must be at least 1");
  if (!std::isfinite(b.amplitude)) throw ConfigError("bcs.amplitude", "must be finite");
  if (b.profile == "exact") {
    if (b.reference == "example") {
      if (cfg.domain.kind != "example") {
        throw ConfigError("bcs.reference", "the example field needs domain.kind = example");
      }
    } else if (b.reference == "wedge_mode") {
      if (cfg.domain.kind != "wedge") {
        throw ConfigError("bcs.reference", "wedge_mode needs domain.kind = wedge");
      }
    } else {
      throw ConfigError("bcs.reference", "expected example or wedge_mode, got '" + b.reference + "'");
    }
  }

  try {
    cfg.solve.validate();
  } catch (const std::invalid_argument& e) {
    const std::string what = e.what();
    throw ConfigError(what.substr(0, what.find(' ')), what);
  }
  for (std::size_t k = 1; k < cfg.amplitudes.size(); ++k) {
    if (!(cfg.amplitudes[k] > cfg.amplitudes[k - 1])) {
      throw ConfigError("solve.amplitudes", "must be strictly ascending");
    }
  }

  const auto& x = cfg.diagnostics;
  if (!(x.margin >= 1.0)) throw ConfigError("diagnostics.margin", "must be at least 1");
  if (!(x.burn_in >= 0.0)) throw ConfigError("diagnostics.burn_in", "must be non-negative");
  if (!(x.holder_alpha > 0.0 && x.holder_alpha < 1.0)) {
    throw ConfigError("diagnostics.holder_alpha", "must lie in (0, 1)");
  }
  if (x.pair_budget < 1) throw ConfigError("diagnostics.pair_budget", "must be positive");
  if (!(x.qc_tolerance >= 0.0)) throw ConfigError("diagnostics.qc_tolerance", "must be non-negative");
  for (const auto& band : x.bands) {
    if (!(band.lo < band.hi)) throw ConfigError("diagnostics.band_edges", "must be strictly ascending");
  }
  if (cfg.output.workers < 1) throw ConfigError("output.workers", "must be at least 1");
  if (cfg.output.field.empty()) throw ConfigError("output.field", "must not be empty");
  if (cfg.output.report.empty()) throw ConfigError("output.report", "must not be empty");
}

}  // namespace cornerflow
