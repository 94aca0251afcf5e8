#include <doctest.h>

#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "zpdc/config.hpp"
#include "zpdc/pipelines.hpp"

namespace fs = std::filesystem;

namespace {

int cli(const std::string& args) {
  const std::string cmd = std::string(ZPDC_CLI_PATH) + " " + args + " > /dev/null 2>&1";
  const int status = std::system(cmd.c_str());
  return WEXITSTATUS(status);
}

std::string slurp(const fs::path& path) {
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buffer;
  buffer << in.rdbuf();
  return buffer.str();
}

std::vector<std::vector<std::string>> parse_csv(const std::string& text) {
  std::vector<std::vector<std::string>> rows;
  std::istringstream lines(text);
  for (std::string line; std::getline(lines, line);) {
    std::vector<std::string> cells;
    std::istringstream cols(line);
    for (std::string cell; std::getline(cols, cell, ',');) cells.push_back(cell);
    rows.push_back(cells);
  }
  return rows;
}

}  // namespace

TEST_CASE("validate: clean defaults, warning-only ceiling, hard errors") {
  CHECK(cli("validate") == 0);
  CHECK(cli("validate --set crystal.g=0.5") == 0);       // warning, still runnable
  CHECK(cli("validate --set grid.e_center=1.1") == 3);   // matching condition
  CHECK(cli("validate --set nonsense.key=1") == 2);      // unknown key
  CHECK(cli("validate --set crystal.g=banana") == 2);    // malformed value
}

TEST_CASE("bell smoke run writes the scan and the report") {
  const fs::path dir = fs::temp_directory_path() / "zpdc-cli-bell";
  fs::remove_all(dir);
  CHECK(cli("bell --set ensemble.realizations=512 --set probe.samples=16 --out " +
            dir.string()) == 0);
  CHECK(fs::exists(dir / "bell_scan.csv"));
  CHECK(fs::exists(dir / "bell_report.txt"));
  CHECK(fs::exists(dir / "manifest.txt"));
  const std::string report = slurp(dir / "bell_report.txt");
  CHECK(report.find("fit.visibility") != std::string::npos);
  CHECK(report.find("chsh.s") != std::string::npos);
  const auto rows = parse_csv(slurp(dir / "bell_scan.csv"));
  CHECK(rows.at(0) ==
        std::vector<std::string>{"phi1", "phi2", "rate", "stderr", "fit", "residual"});
  CHECK(rows.size() == 37);  // header + 36 pairs
  fs::remove_all(dir);
}

TEST_CASE("correlate with the coupling off reports null cross-correlations") {
  zpdc::RunConfig config;
  config.crystal_g = 0.0;
  config.ensemble_realizations = 20000;
  const auto result = zpdc::run_correlate(config);
  const auto rows = parse_csv(result.files.at("correlate.csv"));
  CHECK(rows.at(0).at(4) == "analytic_re");
  for (std::size_t i = 1; i < rows.size(); ++i) {
    const double re = std::stod(rows[i][1]), im = std::stod(rows[i][2]);
    const double err = std::stod(rows[i][3]);
    CHECK(std::stod(rows[i][4]) == 0.0);
    CHECK(std::abs(re) < 3.5 * err);
    CHECK(std::abs(im) < 3.5 * err);
  }
}

TEST_CASE("dump-grid emits the grid table and the map table") {
  zpdc::RunConfig config;
  const auto result = zpdc::run_dump_grid(config);
  const auto grid_rows = parse_csv(result.files.at("grid.csv"));
  CHECK(grid_rows.at(0) ==
        std::vector<std::string>{"sector", "index", "frequency", "detuning", "weight"});
  CHECK(grid_rows.size() == 33);  // header + 4 sectors x 8
  const auto map_rows = parse_csv(result.files.at("map.csv"));
  CHECK(map_rows.at(0).back() == "conjugate_flag");
  CHECK(map_rows.size() > 1);
}

TEST_CASE("field dump for debugging writes one row per realization and sample") {
  zpdc::RunConfig config;
  config.ensemble_realizations = 8;
  config.probe_samples = 5;
  config.correlate_dump_fields = 1;
  const auto result = zpdc::run_correlate(config);
  const auto rows = parse_csv(result.files.at("fields.csv"));
  CHECK(rows.at(0) == std::vector<std::string>{"realization", "t", "re", "im"});
  CHECK(rows.size() == 1 + 8 * 5);

  config.ensemble_realizations = 100000;
  CHECK_THROWS(zpdc::run_correlate(config));
}

TEST_CASE("scan pipeline covers the three parameters") {
  zpdc::RunConfig config;
  config.ensemble_realizations = 2000;
  config.probe_samples = 32;
  for (const std::string parameter : {"window", "angle", "tau"}) {
    config.scan_parameter = parameter;
    config.scan_values = parameter == "angle" ? "0.0,0.5,1.0" : "4,8,16";
    const auto result = zpdc::run_scan(config);
    const auto rows = parse_csv(result.files.at("scan.csv"));
    CHECK(rows.at(0).at(0) == "parameter");
    CHECK(rows.size() == 4);
  }
}
