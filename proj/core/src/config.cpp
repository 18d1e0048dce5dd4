#include "twotier/config.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <sstream>

namespace twotier::harness {

namespace {

std::string trim(const std::string& s) {
  size_t a = 0, b = s.size();
  while (a < b && std::isspace(static_cast<unsigned char>(s[a]))) ++a;
  while (b > a && std::isspace(static_cast<unsigned char>(s[b - 1]))) --b;
  return s.substr(a, b - a);
}

std::vector<std::string> split(const std::string& s, char sep) {
  std::vector<std::string> out;
  std::stringstream ss(s);
  std::string item;
  while (std::getline(ss, item, sep)) out.push_back(trim(item));
  if (!s.empty() && s.back() == sep) out.push_back("");
  return out;
}

int parse_int(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const long long x = std::stoll(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return static_cast<int>(x);
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects an integer, got '" + v + "'");
  }
}

double parse_double(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    const double x = std::stod(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects a number, got '" + v + "'");
  }
}

uint64_t parse_u64(const std::string& key, const std::string& v) {
  try {
    size_t pos = 0;
    if (!v.empty() && v[0] == '-') throw std::invalid_argument(v);
    const unsigned long long x = std::stoull(v, &pos);
    if (pos != v.size()) throw std::invalid_argument(v);
    return x;
  } catch (const std::exception&) {
    throw ConfigError("config: key '" + key + "' expects an unsigned integer, got '" + v + "'");
  }
}

std::vector<double> parse_double_list(const std::string& key, const std::string& v) {
  std::vector<double> out;
  for (const std::string& item : split(v, ','))
    if (!item.empty()) out.push_back(parse_double(key, item));
  if (out.empty()) throw ConfigError("config: key '" + key + "' expects a nonempty list");
  return out;
}

std::vector<int> parse_int_list(const std::string& key, const std::string& v) {
  std::vector<int> out;
  for (const std::string& item : split(v, ','))
    if (!item.empty()) out.push_back(parse_int(key, item));
  if (out.empty()) throw ConfigError("config: key '" + key + "' expects a nonempty list");
  return out;
}

track::GammaPolicy parse_gamma(const std::string& v) {
  const auto parts = split(v, ':');
  try {
    if (parts.size() == 2 && parts[0] == "spectral")
      return track::GammaPolicy::spectral(parse_double("gamma_policy", parts[1]));
    if (parts.size() == 2 && parts[0] == "fixed")
      return track::GammaPolicy::fixed(parse_double("gamma_policy", parts[1]));
    if (parts.size() == 1 && parts[0] == "spectral") return track::GammaPolicy::spectral();
  } catch (const ValidationError& e) {
    throw ConfigError(std::string("config: gamma_policy: ") + e.what());
  }
  throw ConfigError("config: gamma_policy expects 'spectral[:safety]' or 'fixed:step', got '" +
                    v + "'");
}

const std::vector<std::string> kKnownSchemes = {"oracle", "compensated", "gradient_only",
                                                "one_tier"};

}  // namespace

int SimConfig::streams_per_user() const {
  return std::min(n_r, m / (clusters_per_cell * k));
}

void SimConfig::validate() const {
  auto positive = [](int v, const char* name) {
    if (v < 1) throw ConfigError(std::string("config: ") + name + " must be positive");
  };
  positive(g, "g");
  positive(clusters_per_cell, "clusters_per_cell");
  positive(k, "k");
  positive(n_t, "n_t");
  positive(n_r, "n_r");
  positive(m, "m");
  positive(superframe_len, "superframe_len");
  positive(n_cg, "n_cg");
  positive(quadrature_points, "quadrature_points");
  if (n_superframes < 0) throw ConfigError("config: n_superframes must be nonnegative");
  if (m > n_t) throw ConfigError("config: m must not exceed n_t");
  if (streams_per_user() < 1)
    throw ConfigError(
        "config: stream allocation min(n_r, m / users_per_cell) is empty; raise m or lower k");
  if (1LL * clusters_per_cell * k * streams_per_user() > m)
    throw ConfigError("config: total streams exceed the outer precoder rank");
  if (!(w > 0.0)) throw ConfigError("config: w must be positive");
  if (!(carrier_hz > 0.0)) throw ConfigError("config: carrier_hz must be positive");
  if (!(subframe_duration > 0.0)) throw ConfigError("config: subframe_duration must be positive");
  if (!(angular_spread_deg > 0.0 && angular_spread_deg < 180.0))
    throw ConfigError("config: angular_spread_deg must lie in (0, 180)");
  if (power_dbs.empty()) throw ConfigError("config: power_dbs must be nonempty");
  if (speeds_kmh.empty()) throw ConfigError("config: speeds_kmh must be nonempty");
  for (double s : speeds_kmh)
    if (s < 0.0) throw ConfigError("config: speeds_kmh must be nonnegative");
  if (latency_subframes.empty())
    throw ConfigError("config: latency_subframes must be nonempty");
  for (int l : latency_subframes)
    if (l < 0) throw ConfigError("config: latency_subframes must be nonnegative");
  if (scheme_set.empty()) throw ConfigError("config: scheme_set must be nonempty");
  for (const std::string& s : scheme_set)
    if (std::find(kKnownSchemes.begin(), kKnownSchemes.end(), s) == kKnownSchemes.end())
      throw ConfigError("config: unknown scheme '" + s + "'");
}

std::string SimConfig::to_key_values() const {
  std::ostringstream os;
  auto list_d = [](const std::vector<double>& v) {
    std::ostringstream s;
    for (size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
    return s.str();
  };
  auto list_i = [](const std::vector<int>& v) {
    std::ostringstream s;
    for (size_t i = 0; i < v.size(); ++i) s << (i ? "," : "") << v[i];
    return s.str();
  };
  auto list_s = [](const std::vector<std::string>& v) {
    std::string s;
    for (size_t i = 0; i < v.size(); ++i) s += (i ? "," : "") + v[i];
    return s;
  };
  os << "g = " << g << "\n"
     << "clusters_per_cell = " << clusters_per_cell << "\n"
     << "k = " << k << "\n"
     << "n_t = " << n_t << "\n"
     << "n_r = " << n_r << "\n"
     << "m = " << m << "\n"
     << "superframe_len = " << superframe_len << "\n"
     << "n_superframes = " << n_superframes << "\n"
     << "power_dbs = " << list_d(power_dbs) << "\n"
     << "speeds_kmh = " << list_d(speeds_kmh) << "\n"
     << "carrier_hz = " << carrier_hz << "\n"
     << "subframe_duration = " << subframe_duration << "\n"
     << "w = " << w << "\n"
     << "gamma_policy = "
     << (gamma_policy.kind == track::GammaPolicy::Kind::spectral ? "spectral:" : "fixed:")
     << gamma_policy.value << "\n"
     << "n_cg = " << n_cg << "\n"
     << "latency_subframes = " << list_i(latency_subframes) << "\n"
     << "seed = " << seed << "\n"
     << "scheme_set = " << list_s(scheme_set) << "\n"
     << "quadrature_points = " << quadrature_points << "\n"
     << "angular_spread_deg = " << angular_spread_deg << "\n";
  return os.str();
}

SimConfig parse_config(const std::string& text) {
  SimConfig cfg;
  std::istringstream is(text);
  std::string line;
  int line_no = 0;
  while (std::getline(is, line)) {
    ++line_no;
    const size_t hash = line.find('#');
    if (hash != std::string::npos) line = line.substr(0, hash);
    line = trim(line);
    if (line.empty()) continue;
    const size_t eq = line.find('=');
    if (eq == std::string::npos)
      throw ConfigError("config: line " + std::to_string(line_no) + " is not 'key = value'");
    const std::string key = trim(line.substr(0, eq));
    const std::string value = trim(line.substr(eq + 1));
    if (key.empty() || value.empty())
      throw ConfigError("config: line " + std::to_string(line_no) + " has an empty key or value");

    if (key == "g") cfg.g = parse_int(key, value);
    else if (key == "clusters_per_cell") cfg.clusters_per_cell = parse_int(key, value);
    else if (key == "k") cfg.k = parse_int(key, value);
    else if (key == "n_t") cfg.n_t = parse_int(key, value);
    else if (key == "n_r") cfg.n_r = parse_int(key, value);
    else if (key == "m") cfg.m = parse_int(key, value);
    else if (key == "superframe_len") cfg.superframe_len = parse_int(key, value);
    else if (key == "n_superframes") cfg.n_superframes = parse_int(key, value);
    else if (key == "power_dbs") cfg.power_dbs = parse_double_list(key, value);
    else if (key == "speeds_kmh") cfg.speeds_kmh = parse_double_list(key, value);
    else if (key == "carrier_hz") cfg.carrier_hz = parse_double(key, value);
    else if (key == "subframe_duration") cfg.subframe_duration = parse_double(key, value);
    else if (key == "w") cfg.w = parse_double(key, value);
    else if (key == "gamma_policy") cfg.gamma_policy = parse_gamma(value);
    else if (key == "n_cg") cfg.n_cg = parse_int(key, value);
    else if (key == "latency_subframes") cfg.latency_subframes = parse_int_list(key, value);
    else if (key == "seed") cfg.seed = parse_u64(key, value);
    else if (key == "scheme_set") cfg.scheme_set = split(value, ',');
    else if (key == "quadrature_points") cfg.quadrature_points = parse_int(key, value);
    else if (key == "angular_spread_deg") cfg.angular_spread_deg = parse_double(key, value);
    else throw ConfigError("config: unknown key '" + key + "'");
  }
  cfg.validate();
  return cfg;
}

SimConfig load_config(const std::string& path) {
  std::ifstream f(path);
  if (!f) throw ConfigError("config not found: " + path);
  std::stringstream buf;
  buf << f.rdbuf();
  return parse_config(buf.str());
}

}  // namespace twotier::harness
