#include "twotier/cli.hpp"

#include <CLI11.hpp>

#include <charconv>
#include <cmath>
#include <filesystem>
#include <fstream>
#include <iostream>
#include <map>
#include <sstream>
#include <vector>

#include "twotier/acceptance.hpp"
#include "twotier/config.hpp"
#include "twotier/counters.hpp"
#include "twotier/errors.hpp"
#include "twotier/simulation.hpp"

namespace twotier::harness {

namespace {

namespace fs = std::filesystem;

std::string fmt(double x) {
  char buf[40];
  const auto res = std::to_chars(buf, buf + sizeof buf, x);
  return std::string(buf, res.ptr);
}

std::vector<std::string> split_csv(const std::string& s) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, ',')) out.push_back(item);
  return out;
}

void write_file(const fs::path& path, const std::string& content, std::ostream& out) {
  std::ofstream f(path);
  if (!f) throw Error("cannot write " + path.string());
  f << content;
  out << "wrote " << path.string() << "\n";
}

struct CommonFlags {
  std::string config_path;
  std::string out_dir = ".";
  std::string scheme_csv;
  std::uint64_t seed = 0;
  bool seed_set = false;
};

SimConfig resolve_config(const CommonFlags& flags) {
  SimConfig cfg = flags.config_path.empty() ? SimConfig{} : load_config(flags.config_path);
  if (flags.seed_set) cfg.seed = flags.seed;
  if (!flags.scheme_csv.empty()) cfg.scheme_set = split_csv(flags.scheme_csv);
  cfg.validate();
  return cfg;
}

int do_run(const CommonFlags& flags, const std::string& format, std::ostream& out) {
  const SimConfig cfg = resolve_config(flags);
  const SimReport rep = run_simulation(cfg);
  fs::create_directories(flags.out_dir);
  if (format == "json") {
    write_file(fs::path(flags.out_dir) / "report.json", rep.to_json(), out);
  } else {
    write_file(fs::path(flags.out_dir) / "rates.csv", rep.rates_csv(), out);
    write_file(fs::path(flags.out_dir) / "diagnostics.csv", rep.diagnostics_csv(), out);
  }
  return 0;
}

int do_sweep(const CommonFlags& flags, const std::string& vary, const std::string& points_csv,
             int n_seeds, std::ostream& out) {
  SimConfig base = resolve_config(flags);
  std::vector<double> points;
  for (const std::string& p : split_csv(points_csv)) {
    try {
      points.push_back(std::stod(p));
    } catch (const std::exception&) {
      throw ConfigError("sweep: bad point '" + p + "'");
    }
  }
  if (points.empty()) throw ConfigError("sweep: --points must be a nonempty list");
  if (n_seeds < 1) throw ConfigError("sweep: --seeds must be positive");
  if (vary == "power") {
    base.power_dbs = points;
    base.speeds_kmh = {base.speeds_kmh.front()};
  } else {  // speed
    base.speeds_kmh = points;
    base.power_dbs = {base.power_dbs.front()};
  }
  base.validate();

  // per scheme id, per point: one mean per-cell rate per seed
  std::map<std::string, std::vector<std::vector<double>>> samples;
  std::vector<std::string> scheme_order;
  for (int i = 0; i < n_seeds; ++i) {
    SimConfig cfg = base;
    cfg.seed = base.seed + static_cast<std::uint64_t>(i);
    const SimReport rep = run_simulation(cfg);
    for (const auto& r : rep.rates) {
      const double point = vary == "power" ? r.power_db : r.speed_kmh;
      const auto it = std::find(points.begin(), points.end(), point);
      if (it == points.end()) continue;
      auto ins = samples.try_emplace(r.scheme, points.size());
      if (ins.second) scheme_order.push_back(r.scheme);
      ins.first->second[static_cast<size_t>(it - points.begin())].push_back(
          r.mean_per_cell_rate);
    }
  }

  const std::string header =
      "scheme,sweep_variable,sweep_value,mean_per_cell_rate_bps_hz,stderr,n_seeds\n";
  fs::create_directories(flags.out_dir);
  std::string combined = header;
  for (const std::string& id : scheme_order) {
    std::string body;
    for (size_t pi = 0; pi < points.size(); ++pi) {
      const auto& v = samples[id][pi];
      const double n = static_cast<double>(v.size());
      double mean = 0.0;
      for (double x : v) mean += x;
      mean /= std::max(1.0, n);
      double ss = 0.0;
      for (double x : v) ss += (x - mean) * (x - mean);
      const double se = v.size() > 1 ? std::sqrt(ss / (n - 1.0) / n) : 0.0;
      body += id + "," + vary + "," + fmt(points[pi]) + "," + fmt(mean) + "," + fmt(se) + "," +
              std::to_string(v.size()) + "\n";
    }
    write_file(fs::path(flags.out_dir) / ("sweep_" + vary + "_" + id + ".csv"), header + body,
               out);
    combined += body;
  }
  out << combined;
  return 0;
}

int do_counters(int n_t, int k, int n_r, int t_s, int m, std::ostream& out) {
  const auto fb = counters::count_feedback(n_t, n_r, k, t_s);
  out << "one_tier_feedback " << std::llround(fb.one_tier_feedback) << "\n"
      << "two_tier_feedback " << std::llround(fb.two_tier_feedback) << " (exact "
      << fmt(fb.two_tier_feedback) << ")\n"
      << "one_tier_signaling " << std::llround(fb.one_tier_signaling) << "\n"
      << "two_tier_signaling " << std::llround(fb.two_tier_signaling) << " (exact "
      << fmt(fb.two_tier_signaling) << ")\n";
  const auto cc = counters::count_complexity(n_t, m);
  out << "formula_macs " << cc.formula_macs << " (" << fmt(cc.formula_macs / 1e6) << " MCMA)\n"
      << "instrumented_macs " << cc.instrumented_macs << " (ratio "
      << fmt(static_cast<double>(cc.instrumented_macs) / static_cast<double>(cc.formula_macs))
      << ")\n"
      << "svd_macs " << cc.svd_macs << " (" << fmt(cc.svd_macs / 1e6) << " MCMA)\n";
  return 0;
}

}  // namespace

int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err) {
  CLI::App app{"two-tier subspace-tracked precoding simulator"};
  app.require_subcommand(1);

  CommonFlags flags;
  std::string format = "json";
  std::string vary, points_csv;
  int n_seeds = 5;
  int nt = 24, k = 8, nr = 2, ts = 100, m = 8;

  auto add_common = [&](CLI::App* cmd) {
    cmd->add_option("--config", flags.config_path, "configuration file (key = value lines)");
    cmd->add_option("--seed", flags.seed, "override the config seed")
        ->each([&](const std::string&) { flags.seed_set = true; });
    cmd->add_option("--out", flags.out_dir, "output directory");
    cmd->add_option("--scheme", flags.scheme_csv, "comma-separated scheme subset");
  };

  CLI::App* run = app.add_subcommand("run", "simulate one configuration and write report files");
  add_common(run);
  run->add_option("--format", format, "report format")
      ->check(CLI::IsMember({"csv", "json"}));

  CLI::App* sweep = app.add_subcommand("sweep", "sweep power or speed, one CSV per scheme");
  add_common(sweep);
  sweep->add_option("--vary", vary, "swept variable")
      ->required()
      ->check(CLI::IsMember({"power", "speed"}));
  sweep->add_option("--points", points_csv, "comma-separated sweep points")->required();
  sweep->add_option("--seeds", n_seeds, "number of Monte-Carlo seeds");

  CLI::App* check = app.add_subcommand("check", "run the acceptance suite");

  CLI::App* counters_cmd = app.add_subcommand("counters", "print feedback and complexity counts");
  counters_cmd->add_option("--nt", nt, "transmit antennas");
  counters_cmd->add_option("--k", k, "users per cell");
  counters_cmd->add_option("--nr", nr, "receive antennas");
  counters_cmd->add_option("--ts", ts, "subframes per superframe");
  counters_cmd->add_option("--m", m, "outer subspace dimension");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    const int rc = app.exit(e);
    return rc == 0 ? 0 : 1;
  }

  try {
    if (run->parsed()) return do_run(flags, format, out);
    if (sweep->parsed()) return do_sweep(flags, vary, points_csv, n_seeds, out);
    if (check->parsed()) return run_acceptance(out) == 0 ? 0 : 3;
    if (counters_cmd->parsed()) return do_counters(nt, k, nr, ts, m, out);
  } catch (const ConfigError& e) {
    err << "error: " << e.what() << "\n";
    return 2;
  } catch (const std::exception& e) {
    err << "error: " << e.what() << "\n";
    return 3;
  }
  return 1;
}

int cli_main(int argc, const char* const* argv) {
  return cli_main(argc, argv, std::cout, std::cerr);
}

}  // namespace twotier::harness
