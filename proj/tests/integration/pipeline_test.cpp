#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <sstream>
#include <string>

#include "cornerflow/io.hpp"

namespace fs = std::filesystem;
using namespace cornerflow;

namespace {
int run(const std::string& args) {
  const int status = std::system((std::string(CORNERFLOW_CLI) + " " + args + " 2>/dev/null").c_str());
  return WIFEXITED(status) ? WEXITSTATUS(status) : -1;
}

std::string value(const KeyValues& kv, const std::string& key) {
  for (const auto& [k, v] : kv) {
    if (k == key) return v;
  }
  return "";
}

fs::path prepare(const std::string& name, const std::string& config) {
  const fs::path d = fs::temp_directory_path() / "cornerflow_pipeline" / name;
  fs::remove_all(d);
  fs::create_directories(d);
  std::string text = read_file(std::string(CORNERFLOW_CONFIGS) + "/" + config);
  text = text.substr(0, text.find("[output]")) + "[output]\nfield = " + (d / "field.txt").string() +
         "\nreport = " + (d / "report.txt").string() + "\nworkers = 3\n";
  write_file_atomic((d / "case.ini").string(), text);
  return d;
}
}  // namespace

TEST_CASE("mesh sweep of the exact example converges at second order") {
  const auto d = prepare("mesh", "example_exact.ini");
  REQUIRE(run("sweep " + (d / "case.ini").string() + " --key mesh --values 32,64,128") == 0);
  const auto kv = parse_report(read_file((d / "report.summary.txt").string()));
  CHECK(value(kv, "sweep.cases") == "3");
  CHECK(std::stod(value(kv, "summary.l2_order")) == doctest::Approx(2.0).epsilon(0.05));
  for (int i = 0; i < 3; ++i) {
    CHECK(fs::exists(d / ("field.mesh-" + std::to_string(i) + ".txt")));
    CHECK(fs::exists(d / ("report.mesh-" + std::to_string(i) + ".txt")));
  }
}

TEST_CASE("L sweep is independent of the worker count") {
  const auto d = prepare("L", "wedge_uniform.ini");
  const std::string cfg = (d / "case.ini").string();
  REQUIRE(run("sweep " + cfg + " --key L --values 3,4,5") == 0);
  const std::string summary = read_file((d / "report.summary.txt").string());
  const auto kv = parse_report(summary);
  std::istringstream row(value(kv, "case.2"));
  double v = 0;
  int code = -1;
  std::string status;
  row >> v >> code >> status;
  CHECK(v == 5.0);
  CHECK(code == 0);
  CHECK(status == "certified");

  std::string serial = read_file(cfg);
  serial.replace(serial.find("workers = 3"), 11, "workers = 1");
  write_file_atomic(cfg, serial);
  const std::string field = read_file((d / "field.L-1.txt").string());
  REQUIRE(run("sweep " + cfg + " --key L --values 3,4,5") == 0);
  CHECK(read_file((d / "report.summary.txt").string()) == summary);
  CHECK(read_file((d / "field.L-1.txt").string()) == field);
}

TEST_CASE("sweep rejects unknown keys") {
  const auto d = prepare("bad", "wedge_uniform.ini");
  CHECK(run("sweep " + (d / "case.ini").string() + " --key colour --values 1,2") == 1);
}
