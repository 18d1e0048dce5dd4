#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "twotier/errors.hpp"
#include "twotier/tracker.hpp"

namespace twotier::harness {

// Full description of one simulation run. Parsed from flat `key = value`
// text where the keys are exactly the field names below; `#` starts a
// comment. Unknown keys and malformed values are configuration errors.
struct SimConfig {
  int g = 3;                  // cells
  int clusters_per_cell = 1;  // scattering clusters per cell
  int k = 2;                  // users per cell
  int n_t = 16;               // BS antennas
  int n_r = 1;                // MS antennas
  int m = 2;                  // outer precoder rank
  int superframe_len = 100;   // subframes per super-frame
  int n_superframes = 50;
  std::vector<double> power_dbs = {10.0};
  std::vector<double> speeds_kmh = {10.0};
  double carrier_hz = 2e9;
  double subframe_duration = 1e-3;  // seconds
  double w = 1.0;                   // direct-link weight in the statistics objective
  track::GammaPolicy gamma_policy = track::GammaPolicy::spectral();
  int n_cg = 1;
  std::vector<int> latency_subframes = {0, 5};  // single-tier baseline CSI lag
  uint64_t seed = 1;
  std::vector<std::string> scheme_set = {"oracle", "compensated", "gradient_only", "one_tier"};
  int quadrature_points = 4096;
  double angular_spread_deg = 20.0;

  // streams per user implied by the uniform allocation min(n_r, m / k)
  int streams_per_user() const;
  void validate() const;  // throws ConfigError on any violated invariant
  std::string to_key_values() const;
};

// Parse config text / file. Both apply defaults first, then overrides,
// then validate.
SimConfig parse_config(const std::string& text);
SimConfig load_config(const std::string& path);

}  // namespace twotier::harness
