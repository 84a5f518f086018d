#include <doctest.h>

#include <cmath>
#include <filesystem>
#include <numbers>
#include <stdexcept>
#include <string>

#include "cornerflow/io.hpp"

using namespace cornerflow;

namespace {
constexpr double kPi = std::numbers::pi;

FieldFile uniform_field(bool compressible) {
  const auto mesh = StripMesh::build(CornerDomain::wedge(1.5 * kPi, 1.0), {0.0, 2.0, 12, 8, 2});
  const Eigen::VectorXd psi = interpolate(*mesh, [](const Vec2& x) { return 0.1 * x.y(); });
  GasSpec gas;
  gas.compressible = compressible;
  const auto model = compressible ? FlowModel::compressible(GasModel(1.4, 0.8)) : FlowModel::incompressible();
  return make_field_file(*mesh, model, gas, psi);
}
}  // namespace

TEST_CASE("field files round trip exactly") {
  for (bool compressible : {false, true}) {
    FieldFile f = uniform_field(compressible);
    f.header.emplace_back("extra.note", "uniform");
    const std::string text = format_field(f);
    const FieldFile g = parse_field(text);
    CHECK(format_field(g) == text);
    CHECK(g.rows == f.rows);
    CHECK(g.domain == f.domain);
    CHECK(g.mesh == f.mesh);
    REQUIRE(g.find("extra.note") != nullptr);
    CHECK(*g.find("extra.note") == "uniform");
    CHECK(g.psi().size() == 13 * 9);
  }
  // recovered nodal velocity of uniform flow, up to the mesh error
  const FieldFile f = uniform_field(false);
  for (const auto& row : f.rows) {
    CHECK(row[5] == doctest::Approx(0.1).epsilon(0.1));
    CHECK(std::abs(row[6]) <= 0.01);
  }
}

TEST_CASE("malformed field files are rejected") {
  const std::string text = format_field(uniform_field(false));
  CHECK_THROWS_AS(parse_field(text.substr(0, text.size() - 40)), std::runtime_error);
  std::string wrong = text;
  wrong.replace(wrong.find("cornerflow-field 1"), 18, "cornerflow-field 9");
  CHECK_THROWS_AS(parse_field(wrong), std::runtime_error);
  CHECK_THROWS_AS(parse_field(text + "1 2 3\n"), std::runtime_error);
  CHECK_THROWS_AS(read_field("/nonexistent/field.txt"), std::runtime_error);
}

TEST_CASE("reports and atomic writes") {
  const KeyValues kv{{"status", "certified"}, {"solve.max_mach", "0.25"}, {"list", "1 2 3"}};
  const std::string text = format_report(kv);
  CHECK(text == "status = certified\nsolve.max_mach = 0.25\nlist = 1 2 3\n");
  CHECK(parse_report(text) == kv);

  const auto dir = std::filesystem::temp_directory_path() / "cornerflow_io_test";
  std::filesystem::remove_all(dir);
  const std::string path = (dir / "sub" / "r.txt").string();
  write_file_atomic(path, text);
  CHECK(read_file(path) == text);
  CHECK_FALSE(std::filesystem::exists(path + ".tmp"));
  std::filesystem::remove_all(dir);
}

TEST_CASE("contours of a linear field are straight") {
  const FieldFile f = uniform_field(false);
  const std::vector<double> levels{0.05, 0.2};
  const auto pts = contour_polylines(f, levels);
  REQUIRE_FALSE(pts.empty());
  for (const auto& p : pts) CHECK(p.y == doctest::Approx(10.0 * p.level).epsilon(1e-12));
  // each level is one open polyline
  int max_id = 0;
  for (const auto& p : pts) max_id = std::max(max_id, p.polyline);
  CHECK(max_id <= 3);
  const std::string csv = format_contours_csv(pts);
  CHECK(csv.rfind("level,polyline,x,y\n", 0) == 0);
  CHECK(contour_polylines(f, {100.0}).empty());
}
