#include "cornerflow/io.hpp"

#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <map>
#include <sstream>
#include <stdexcept>

#include "cornerflow/diagnostics.hpp"

namespace cornerflow {

namespace {

double to_double(const std::string& s, const std::string& what) {
  char* end = nullptr;
  const double v = std::strtod(s.c_str(), &end);
  if (end == s.c_str() || *end != '\0') throw std::runtime_error("field file: bad number for " + what + ": '" + s + "'");
  return v;
}

int to_int(const std::string& s, const std::string& what) {
  const double v = to_double(s, what);
  if (v != std::floor(v)) throw std::runtime_error("field file: " + what + " must be an integer");
  return static_cast<int>(v);
}

}  // namespace

const std::string* FieldFile::find(const std::string& key) const {
  for (const auto& [k, v] : header) {
    if (k == key) return &v;
  }
  return nullptr;
}

Eigen::VectorXd FieldFile::psi() const {
  Eigen::VectorXd p(static_cast<Eigen::Index>(rows.size()));
  for (std::size_t k = 0; k < rows.size(); ++k) p[static_cast<Eigen::Index>(k)] = rows[k][4];
  return p;
}

FieldFile make_field_file(const StripMesh& mesh, const FlowModel& model, const GasSpec& gas,
                          const Eigen::VectorXd& psi) {
  FieldFile f;
  f.domain = mesh.domain().spec();
  f.gas = gas;
  f.mesh = mesh.spec();
  const GradientMaps maps = gradient_maps(mesh, psi);
  f.rows.resize(mesh.node_count());
  for (int i = 0; i <= mesh.n_ell(); ++i) {
    for (int j = 0; j <= mesh.n_lam(); ++j) {
      const int n = mesh.node(i, j);
      const Vec2 fm = maps.node_f[n];
      const Vec2 m(-fm.y(), -fm.x());
      const double q = 0.5 * m.squaredNorm();
      double rho = 1.0, mach = 0.0, h = 1.0;
      if (model.is_compressible()) {
        h = model.gas().h_cutoff(q);
        rho = 1.0 / h;
        mach = h * m.norm() / model.gas().sound_speed(rho);
      }
      const Vec2 v = h * m;
      const double ell = i == mesh.n_ell() ? mesh.spec().ell_max : mesh.ell(i);
      const double lam = j == mesh.n_lam() ? 1.0 : mesh.lam(j);
      const Vec2& x = mesh.node_x(n);
      f.rows[n] = {ell, lam, x.x(), x.y(), psi[n], v.x(), v.y(), rho, mach};
    }
  }
  return f;
}

std::string format_field(const FieldFile& f) {
  std::ostringstream out;
  auto kv = [&](const std::string& k, const std::string& v) { out << "# " << k << " = " << v << "\n"; };
  kv("format", kFieldFormat);
  kv("domain.kind", f.domain.kind);
  kv("domain.opening", format_number(f.domain.opening));
  kv("domain.r_min", format_number(f.domain.r_min));
  kv("domain.rotation", format_number(f.domain.rotation));
  kv("domain.inner_opening", format_number(f.domain.inner_opening));
  kv("domain.blend_scale", format_number(f.domain.blend_scale));
  kv("domain.blend_center", format_number(f.domain.blend_center));
  kv("gas.mode", f.gas.compressible ? "compressible" : "incompressible");
  kv("gas.gamma", format_number(f.gas.gamma));
  kv("gas.mach_cap", format_number(f.gas.mach_cap));
  kv("mesh.ell_min", format_number(f.mesh.ell_min));
  kv("mesh.L", format_number(f.mesh.ell_max));
  kv("mesh.n_ell", std::to_string(f.mesh.n_ell));
  kv("mesh.n_lam", std::to_string(f.mesh.n_lam));
  kv("mesh.quad_order", std::to_string(f.mesh.quad_order));
  for (const auto& [k, v] : f.header) {
    if (k.rfind("extra.", 0) == 0) kv(k, v);
  }
  kv("columns", "ell lam x y psi vx vy rho mach");
  char buf[32];
  for (const auto& row : f.rows) {
    for (std::size_t c = 0; c < row.size(); ++c) {
      std::snprintf(buf, sizeof buf, "%.17g", row[c]);
      out << (c ? " " : "") << buf;
    }
    out << "\n";
  }
  return out.str();
}

FieldFile parse_field(const std::string& text) {
  FieldFile f;
  std::istringstream in(text);
  std::string line;
  std::map<std::string, std::string> h;
  while (std::getline(in, line)) {
    if (line.empty()) continue;
    if (line[0] == '#') {
      const auto eq = line.find(" = ");
      if (eq == std::string::npos || line.size() < 2) throw std::runtime_error("field file: bad header line '" + line + "'");
      const std::string key = line.substr(2, eq - 2);
      const std::string value = line.substr(eq + 3);
      f.header.emplace_back(key, value);
      h[key] = value;
      continue;
    }
    std::istringstream ls(line);
    std::array<double, 9> row{};
    std::string tok;
    for (auto& v : row) {
      if (!(ls >> tok)) throw std::runtime_error("field file: short data row");
      v = to_double(tok, "data");
    }
    if (ls >> tok) throw std::runtime_error("field file: long data row");
    f.rows.push_back(row);
  }
  auto need = [&](const std::string& key) -> const std::string& {
    const auto it = h.find(key);
    if (it == h.end()) throw std::runtime_error("field file: missing header '" + key + "'");
    return it->second;
  };
  if (need("format") != kFieldFormat) throw std::runtime_error("field file: unsupported format '" + need("format") + "'");
  f.domain.kind = need("domain.kind");
  f.domain.opening = to_double(need("domain.opening"), "domain.opening");
  f.domain.r_min = to_double(need("domain.r_min"), "domain.r_min");
  f.domain.rotation = to_double(need("domain.rotation"), "domain.rotation");
  f.domain.inner_opening = to_double(need("domain.inner_opening"), "domain.inner_opening");
  f.domain.blend_scale = to_double(need("domain.blend_scale"), "domain.blend_scale");
  f.domain.blend_center = to_double(need("domain.blend_center"), "domain.blend_center");
  f.gas.compressible = need("gas.mode") == "compressible";
  f.gas.gamma = to_double(need("gas.gamma"), "gas.gamma");
  f.gas.mach_cap = to_double(need("gas.mach_cap"), "gas.mach_cap");
  f.mesh.ell_min = to_double(need("mesh.ell_min"), "mesh.ell_min");
  f.mesh.ell_max = to_double(need("mesh.L"), "mesh.L");
  f.mesh.n_ell = to_int(need("mesh.n_ell"), "mesh.n_ell");
  f.mesh.n_lam = to_int(need("mesh.n_lam"), "mesh.n_lam");
  f.mesh.quad_order = to_int(need("mesh.quad_order"), "mesh.quad_order");
  const std::size_t expected = static_cast<std::size_t>(f.mesh.n_ell + 1) * (f.mesh.n_lam + 1);
  if (f.rows.size() != expected) {
    throw std::runtime_error("field file: " + std::to_string(f.rows.size()) + " rows, expected " +
                             std::to_string(expected));
  }
  return f;
}

std::string read_file(const std::string& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw std::runtime_error("cannot read '" + path + "'");
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

FieldFile read_field(const std::string& path) { return parse_field(read_file(path)); }

std::string format_report(const KeyValues& kv) {
  std::string out;
  for (const auto& [k, v] : kv) out += k + " = " + v + "\n";
  return out;
}

KeyValues parse_report(const std::string& text) {
  KeyValues kv;
  std::istringstream in(text);
  std::string line;
  while (std::getline(in, line)) {
    const auto eq = line.find(" = ");
    if (eq == std::string::npos) continue;
    kv.emplace_back(line.substr(0, eq), line.substr(eq + 3));
  }
  return kv;
}

void write_file_atomic(const std::string& path, const std::string& contents) {
  namespace fs = std::filesystem;
  const fs::path target(path);
  if (target.has_parent_path()) fs::create_directories(target.parent_path());
  const fs::path tmp = target.string() + ".tmp";
  {
    std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
    if (!out) throw std::runtime_error("cannot write '" + tmp.string() + "'");
    out << contents;
    out.flush();
    if (!out) {
      out.close();
      fs::remove(tmp);
      throw std::runtime_error("write failed for '" + tmp.string() + "'");
    }
  }
  fs::rename(tmp, target);
}

std::vector<ContourPoint> contour_polylines(const FieldFile& f, const std::vector<double>& levels) {
  const int ni = f.mesh.n_ell, nj = f.mesh.n_lam;
  auto node = [&](int i, int j) { return i * (nj + 1) + j; };
  auto hedge = [&](int i, int j) { return 2 * node(i, j); };      // (i,j)-(i+1,j)
  auto vedge = [&](int i, int j) { return 2 * node(i, j) + 1; };  // (i,j)-(i,j+1)
  auto value = [&](int n) { return f.rows[n][4]; };

  std::vector<ContourPoint> out;
  int polyline = 0;
  for (double level : levels) {
    std::map<int, std::pair<double, double>> point;
    std::vector<std::pair<int, int>> segs;
    auto cross = [&](int e, int a, int b) {
      if (point.count(e)) return;
      const double va = value(a), vb = value(b);
      const double t = (level - va) / (vb - va);
      const auto& ra = f.rows[a];
      const auto& rb = f.rows[b];
      point[e] = {ra[2] + t * (rb[2] - ra[2]), ra[3] + t * (rb[3] - ra[3])};
    };
    for (int i = 0; i < ni; ++i) {
      for (int j = 0; j < nj; ++j) {
        const int n00 = node(i, j), n10 = node(i + 1, j), n11 = node(i + 1, j + 1), n01 = node(i, j + 1);
        const bool in00 = value(n00) >= level, in10 = value(n10) >= level;
        const bool in11 = value(n11) >= level, in01 = value(n01) >= level;
        const int e0 = hedge(i, j), e1 = vedge(i + 1, j), e2 = hedge(i, j + 1), e3 = vedge(i, j);
        std::vector<int> hits;
        if (in00 != in10) { cross(e0, n00, n10); hits.push_back(e0); }
        if (in10 != in11) { cross(e1, n10, n11); hits.push_back(e1); }
        if (in01 != in11) { cross(e2, n01, n11); hits.push_back(e2); }
        if (in00 != in01) { cross(e3, n00, n01); hits.push_back(e3); }
        if (hits.size() == 2) {
          segs.emplace_back(hits[0], hits[1]);
        } else if (hits.size() == 4) {
          const double centre = 0.25 * (value(n00) + value(n10) + value(n11) + value(n01));
          const bool in_c = centre >= level;
          if (in00 == in_c) {
            segs.emplace_back(e0, e1);
            segs.emplace_back(e2, e3);
          } else {
            segs.emplace_back(e3, e0);
            segs.emplace_back(e1, e2);
          }
        }
      }
    }
    std::map<int, std::vector<int>> at;
    for (std::size_t s = 0; s < segs.size(); ++s) {
      at[segs[s].first].push_back(static_cast<int>(s));
      at[segs[s].second].push_back(static_cast<int>(s));
    }
    std::vector<char> used(segs.size(), 0);
    auto walk = [&](int start_seg, int start_edge) {
      std::vector<int> chain{start_edge};
      int seg = start_seg, edge = start_edge;
      while (seg >= 0 && !used[seg]) {
        used[seg] = 1;
        edge = segs[seg].first == edge ? segs[seg].second : segs[seg].first;
        chain.push_back(edge);
        seg = -1;
        for (int s : at[edge]) {
          if (!used[s]) seg = s;
        }
      }
      for (int e : chain) out.push_back({level, polyline, point[e].first, point[e].second});
      ++polyline;
    };
    for (int pass = 0; pass < 2; ++pass) {
      for (std::size_t s = 0; s < segs.size(); ++s) {
        if (used[s]) continue;
        const int a = segs[s].first, b = segs[s].second;
        if (pass == 0) {
          if (at[a].size() == 1) walk(static_cast<int>(s), a);
          else if (at[b].size() == 1) walk(static_cast<int>(s), b);
        } else {
          walk(static_cast<int>(s), a);
        }
      }
    }
  }
  return out;
}

std::string format_contours_csv(const std::vector<ContourPoint>& pts) {
  std::string out = "level,polyline,x,y\n";
  char buf[128];
  for (const auto& p : pts) {
    std::snprintf(buf, sizeof buf, "%.17g,%d,%.17g,%.17g\n", p.level, p.polyline, p.x, p.y);
    out += buf;
  }
  return out;
}

}  // namespace cornerflow
