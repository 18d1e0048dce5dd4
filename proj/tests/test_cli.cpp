#include <filesystem>
#include <fstream>
#include <sstream>
#include <string>
#include <vector>

#include "doctest.h"
#include "twotier/cli.hpp"

#include <json.hpp>

namespace fs = std::filesystem;

namespace {

int run_cli(const std::vector<std::string>& args, std::string* out_text = nullptr,
            std::string* err_text = nullptr) {
  std::vector<const char*> argv;
  argv.push_back("twotier");
  for (const auto& a : args) argv.push_back(a.c_str());
  std::ostringstream out, err;
  const int rc = twotier::harness::cli_main(static_cast<int>(argv.size()), argv.data(), out, err);
  if (out_text) *out_text = out.str();
  if (err_text) *err_text = err.str();
  return rc;
}

struct TempDir {
  fs::path path;
  explicit TempDir(const std::string& name) : path(fs::temp_directory_path() / name) {
    fs::remove_all(path);
    fs::create_directories(path);
  }
  ~TempDir() { fs::remove_all(path); }
};

fs::path write_tiny_config(const fs::path& dir) {
  const fs::path p = dir / "tiny.cfg";
  std::ofstream f(p);
  f << "g = 2\nk = 1\nn_t = 4\nn_r = 1\nm = 2\n"
       "superframe_len = 3\nn_superframes = 2\n"
       "power_dbs = 10\nspeeds_kmh = 10\nlatency_subframes = 0,1\n"
       "quadrature_points = 64\nseed = 5\n";
  return p;
}

std::string first_line(const fs::path& p) {
  std::ifstream f(p);
  std::string line;
  std::getline(f, line);
  return line;
}

}  // namespace

TEST_CASE("cli counters prints the reference count row") {
  std::string out;
  CHECK(run_cli({"counters", "--nt", "24", "--k", "8", "--nr", "2", "--ts", "100"}, &out) == 0);
  CHECK(out.find("one_tier_feedback 384\n") != std::string::npos);
  CHECK(out.find("two_tier_feedback 134") != std::string::npos);
  CHECK(out.find("one_tier_signaling 1152\n") != std::string::npos);
  CHECK(out.find("two_tier_signaling 17") != std::string::npos);
  CHECK(out.find("formula_macs 73728") != std::string::npos);
  CHECK(out.find("svd_macs") != std::string::npos);
}

TEST_CASE("cli exit codes: usage, config, and missing-file errors") {
  std::string err;
  CHECK(run_cli({"explode"}) == 1);
  CHECK(run_cli({"sweep", "--points", "0,10"}) == 1);           // --vary required
  CHECK(run_cli({"run", "--format", "yaml"}) == 1);             // not csv|json
  CHECK(run_cli({"run", "--config", "missing.cfg"}, nullptr, &err) == 2);
  CHECK(err.find("config not found") != std::string::npos);

  TempDir dir("twotier_cli_badcfg");
  const fs::path bad = dir.path / "bad.cfg";
  {
    std::ofstream f(bad);
    f << "g = 0\n";
  }
  CHECK(run_cli({"run", "--config", bad.string()}, nullptr, &err) == 2);
}

TEST_CASE("cli run writes a json report") {
  TempDir dir("twotier_cli_runjson");
  const fs::path cfg = write_tiny_config(dir.path);
  const fs::path out_dir = dir.path / "out";
  CHECK(run_cli({"run", "--config", cfg.string(), "--out", out_dir.string()}) == 0);
  const fs::path report = out_dir / "report.json";
  REQUIRE(fs::exists(report));
  std::ifstream f(report);
  nlohmann::json j;
  f >> j;
  CHECK(j["schema_version"] == 1);
  CHECK(j["rates"].is_array());
  CHECK(j["rates"].size() == 5);  // oracle, compensated, gradient_only, one_tier_l0, one_tier_l1
}

TEST_CASE("cli run writes csv reports with the pinned headers") {
  TempDir dir("twotier_cli_runcsv");
  const fs::path cfg = write_tiny_config(dir.path);
  const fs::path out_dir = dir.path / "out";
  CHECK(run_cli({"run", "--config", cfg.string(), "--out", out_dir.string(), "--format", "csv",
                 "--scheme", "compensated"}) == 0);
  CHECK(first_line(out_dir / "rates.csv") ==
        "scheme,power_db,speed_kmh,mean_per_cell_rate_bps_hz,stderr,n_superframes");
  CHECK(first_line(out_dir / "diagnostics.csv") ==
        "superframe,bs_index,subspace_error,gradient_norm,compensation_norm,degenerate_flag");
  std::ifstream f(out_dir / "rates.csv");
  std::string line, body;
  std::getline(f, line);  // header
  int rows = 0;
  while (std::getline(f, line)) {
    CHECK(line.rfind("compensated,", 0) == 0);
    ++rows;
  }
  CHECK(rows == 1);  // one power, one speed, one scheme
}

TEST_CASE("cli sweep emits one csv per scheme with the pinned columns") {
  TempDir dir("twotier_cli_sweep");
  const fs::path cfg = write_tiny_config(dir.path);
  const fs::path out_dir = dir.path / "out";
  std::string out;
  CHECK(run_cli({"sweep", "--config", cfg.string(), "--out", out_dir.string(), "--vary", "power",
                 "--points", "0,10", "--seeds", "2", "--scheme", "compensated,one_tier"},
                &out) == 0);
  for (const std::string id : {"compensated", "one_tier_l0", "one_tier_l1"}) {
    const fs::path p = out_dir / ("sweep_power_" + id + ".csv");
    REQUIRE(fs::exists(p));
    CHECK(first_line(p) ==
          "scheme,sweep_variable,sweep_value,mean_per_cell_rate_bps_hz,stderr,n_seeds");
    std::ifstream f(p);
    std::string line;
    std::getline(f, line);
    int rows = 0;
    while (std::getline(f, line)) {
      CHECK(line.rfind(id + ",power,", 0) == 0);
      CHECK(line.substr(line.size() - 2) == ",2");  // n_seeds
      ++rows;
    }
    CHECK(rows == 2);  // one per sweep point
  }
  // combined echo holds every scheme's rows
  CHECK(out.find("compensated,power,0") != std::string::npos);
  CHECK(out.find("one_tier_l1,power,10") != std::string::npos);
}
