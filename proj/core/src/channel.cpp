#include "twotier/channel.hpp"

#include <algorithm>
#include <cmath>
#include <complex>
#include <iostream>
#include <limits>

#include "json.hpp"

namespace twotier::channel {
namespace {

constexpr double kPi = 3.14159265358979323846;
constexpr double kLightSpeed = 3.0e8;  // m/s, propagation convention
constexpr double kMinBsDistance = 1.0;

using Json = nlohmann::json;

Json vec2_json(const Eigen::Vector2d& v) { return Json::array({v.x(), v.y()}); }
Eigen::Vector2d json_vec2(const Json& j) { return {j.at(0).get<double>(), j.at(1).get<double>()}; }

}  // namespace

OneRingParams OneRingParams::from_spread(double mean_aod, double angular_spread) {
  if (!(angular_spread > 0.0 && angular_spread < kPi))
    throw ValidationError("OneRingParams: angular spread must lie in (0, pi), got " +
                          std::to_string(angular_spread));
  OneRingParams p;
  p.mean_aod = mean_aod;
  p.angular_spread = angular_spread;
  p.kappa = 1.0 / (4.0 * angular_spread * angular_spread);
  return p;
}

OneRingParams OneRingParams::from_geometry(double mean_aod, double scatter_radius,
                                           double distance) {
  if (!(scatter_radius > 0.0) || !(distance > 0.0))
    throw ValidationError("OneRingParams: scatter radius and distance must be positive");
  OneRingParams p = from_spread(mean_aod, 2.0 * std::atan(scatter_radius / distance));
  p.scatter_radius = scatter_radius;
  p.distance = distance;
  return p;
}

double pas_value(double theta, const OneRingParams& p) {
  return std::exp(p.kappa * std::cos(theta - p.mean_aod)) /
         (2.0 * kPi * std::cyl_bessel_i(0.0, p.kappa));
}

ArrayGeometry ArrayGeometry::ula_half_wavelength(int n_t) {
  if (n_t < 1) throw DimensionError("ArrayGeometry: n_t must be positive");
  ArrayGeometry g;
  g.n_t = n_t;
  g.element_phase = [n_t](double theta) {
    Eigen::VectorXd phase(n_t);
    const double s = kPi * std::sin(theta);
    for (int p = 0; p < n_t; ++p) phase(p) = s * p;
    return phase;
  };
  return g;
}

namespace {

// steering columns a(theta_j) = exp(i phi(theta_j)) on the quadrature grid
Eigen::MatrixXcd steering_grid(const ArrayGeometry& geom, const Eigen::VectorXd& nodes) {
  Eigen::MatrixXcd a(geom.n_t, nodes.size());
  for (Eigen::Index j = 0; j < nodes.size(); ++j) {
    const Eigen::VectorXd phase = geom.element_phase(nodes(j));
    if (phase.size() != geom.n_t || !phase.allFinite())
      throw ValidationError("ArrayGeometry: element_phase returned bad phases");
    for (int p = 0; p < geom.n_t; ++p)
      a(p, j) = std::complex<double>(std::cos(phase(p)), std::sin(phase(p)));
  }
  return a;
}

// composite trapezoid nodes/weights over [-pi, pi]
void trapezoid_rule(int quad_points, Eigen::VectorXd& nodes, Eigen::VectorXd& weights) {
  const double h = 2.0 * kPi / static_cast<double>(quad_points - 1);
  nodes.resize(quad_points);
  weights.setConstant(quad_points, h);
  for (int j = 0; j < quad_points; ++j) nodes(j) = -kPi + h * j;
  weights(0) *= 0.5;
  weights(quad_points - 1) *= 0.5;
}

CorrelationMatrix correlate(const Eigen::MatrixXcd& steering, const Eigen::VectorXd& nodes,
                            const Eigen::VectorXd& weights, const OneRingParams& p) {
  Eigen::VectorXd w(nodes.size());
  for (Eigen::Index j = 0; j < nodes.size(); ++j) w(j) = weights(j) * pas_value(nodes(j), p);
  Eigen::MatrixXcd t = steering * w.asDiagonal() * steering.adjoint();
  CorrelationMatrix out;
  out.t = (t + t.adjoint()) / 2.0;
  return out;
}

}  // namespace

CorrelationMatrix correlation_matrix(const ArrayGeometry& geom, const OneRingParams& p,
                                     int quad_points) {
  if (quad_points < 8 * geom.n_t)
    throw ValidationError("correlation_matrix: " + std::to_string(quad_points) +
                          " quadrature points undersample an " + std::to_string(geom.n_t) +
                          "-element array (need >= 8 n_t)");
  Eigen::VectorXd nodes, weights;
  trapezoid_rule(quad_points, nodes, weights);
  return correlate(steering_grid(geom, nodes), nodes, weights, p);
}

Eigen::MatrixXcd hermitian_sqrt(const Eigen::MatrixXcd& t) {
  if (t.rows() != t.cols()) throw DimensionError("hermitian_sqrt: matrix must be square");
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es((t + t.adjoint()) / 2.0);
  const double floor = -1e-8 * std::max(1e-300, es.eigenvalues().cwiseAbs().maxCoeff());
  Eigen::VectorXd ev = es.eigenvalues();
  for (Eigen::Index i = 0; i < ev.size(); ++i) {
    if (ev(i) < floor)
      throw ValidationError("hermitian_sqrt: matrix is indefinite (eigenvalue " +
                            std::to_string(ev(i)) + ")");
    ev(i) = std::sqrt(std::max(0.0, ev(i)));
  }
  return es.eigenvectors() * ev.asDiagonal() * es.eigenvectors().adjoint();
}

Eigen::Vector2d NetworkTopology::user_position(int cell, int user) const {
  const Cluster& c = clusters.at(cell).at(user / k);
  return c.center + c.user_offsets.at(user % k);
}

Eigen::Vector2d NetworkTopology::user_velocity(int cell, int user) const {
  return clusters.at(cell).at(user / k).velocity;
}

double NetworkTopology::raw_gain(int bs, int cell, int user) const {
  const double d = (user_position(cell, user) - bs_positions.at(bs)).norm();
  if (!(d > 0.0)) throw ValidationError("NetworkTopology: zero BS-user distance");
  return std::pow(d, -cfg.pathloss_exponent);
}

double NetworkTopology::gain(int bs, int cell, int user) const {
  return raw_gain(bs, cell, user) / noise_ref;
}

OneRingParams NetworkTopology::ring_params(int bs, int cell, int cluster) const {
  const Eigen::Vector2d rel = clusters.at(cell).at(cluster).center - bs_positions.at(bs);
  const double d = std::max(rel.norm(), kMinBsDistance);
  const double aod = std::atan2(rel.y(), rel.x());
  if (cfg.geometric_spread) return OneRingParams::from_geometry(aod, cfg.scatter_radius, d);
  OneRingParams p = OneRingParams::from_spread(aod, cfg.angular_spread_deg * kPi / 180.0);
  p.scatter_radius = cfg.scatter_radius;
  p.distance = d;
  return p;
}

NetworkTopology build_network(int g, int clusters_per_cell, int k, const NetworkConfig& cfg,
                              std::uint64_t seed) {
  if (g < 1 || clusters_per_cell < 1 || k < 1)
    throw ValidationError("build_network: counts must be positive");

  NetworkTopology topo;
  topo.g = g;
  topo.clusters_per_cell = clusters_per_cell;
  topo.k = k;
  topo.cfg = cfg;
  topo.seed = seed;

  // square grid, row-major, nearest neighbors at the inter-site distance
  const int side = static_cast<int>(std::ceil(std::sqrt(static_cast<double>(g))));
  for (int b = 0; b < g; ++b)
    topo.bs_positions.emplace_back(cfg.inter_site_distance * (b % side),
                                   cfg.inter_site_distance * (b / side));

  Rng rng = Rng(seed).derive(0x746f706f);
  topo.clusters.resize(g);
  for (int b = 0; b < g; ++b) {
    Rng cell_rng = rng.derive(b);
    for (int c = 0; c < clusters_per_cell; ++c) {
      Cluster cl;
      // uniform in the cell square, kept clear of every BS
      bool placed = false;
      for (int attempt = 0; attempt < 1000 && !placed; ++attempt) {
        cl.center = topo.bs_positions[b] +
                    Eigen::Vector2d((cell_rng.uniform() - 0.5) * cfg.inter_site_distance,
                                    (cell_rng.uniform() - 0.5) * cfg.inter_site_distance);
        placed = true;
        for (const auto& bs : topo.bs_positions)
          if ((cl.center - bs).norm() < cfg.bs_exclusion) placed = false;
      }
      if (!placed)
        throw ValidationError("build_network: could not place a cluster clear of the BSs");

      const double theta = 2.0 * kPi * cell_rng.uniform();
      cl.velocity = cfg.speed_mps * Eigen::Vector2d(std::cos(theta), std::sin(theta));
      for (int u = 0; u < k; ++u) {
        const double radius = cfg.scatter_radius * std::sqrt(cell_rng.uniform());
        const double ang = 2.0 * kPi * cell_rng.uniform();
        cl.user_offsets.emplace_back(radius * std::cos(ang), radius * std::sin(ang));
      }
      topo.clusters[b].push_back(std::move(cl));
    }
  }

  double gmin = std::numeric_limits<double>::infinity();
  for (int b = 0; b < g; ++b)
    for (int u = 0; u < topo.users_per_cell(); ++u)
      gmin = std::min(gmin, topo.raw_gain(b, b, u));
  topo.noise_ref = gmin;
  return topo;
}

void advance_topology(NetworkTopology& topo, double dt) {
  if (dt < 0.0) throw ValidationError("advance_topology: dt must be nonnegative");
  for (auto& cell : topo.clusters)
    for (auto& cl : cell) cl.center += cl.velocity * dt;

  // singularity guard: keep every user at least 1 m from every BS
  for (int b = 0; b < topo.g; ++b) {
    for (auto& cl : topo.clusters[b]) {
      for (auto& off : cl.user_offsets) {
        for (const auto& bs : topo.bs_positions) {
          const Eigen::Vector2d pos = cl.center + off;
          const double d = (pos - bs).norm();
          if (d < kMinBsDistance) {
            const Eigen::Vector2d dir =
                d > 1e-12 ? Eigen::Vector2d((pos - bs) / d) : Eigen::Vector2d(1.0, 0.0);
            off = bs + dir * kMinBsDistance - cl.center;
            std::cerr << "advance_topology: user clamped to 1 m from a BS\n";
          }
        }
      }
    }
  }
}

const CorrelationMatrix& CorrelationTable::at(int bs, int cell, int cluster) const {
  return t.at((static_cast<size_t>(bs) * g + cell) * clusters_per_cell + cluster);
}
CorrelationMatrix& CorrelationTable::at(int bs, int cell, int cluster) {
  return t.at((static_cast<size_t>(bs) * g + cell) * clusters_per_cell + cluster);
}

CorrelationTable correlation_table(const NetworkTopology& topo, const ArrayGeometry& geom,
                                   int quad_points) {
  if (quad_points < 8 * geom.n_t)
    throw ValidationError("correlation_table: quadrature undersampled (need >= 8 n_t points)");
  Eigen::VectorXd nodes, weights;
  trapezoid_rule(quad_points, nodes, weights);
  const Eigen::MatrixXcd steering = steering_grid(geom, nodes);  // shared across links

  CorrelationTable table;
  table.g = topo.g;
  table.clusters_per_cell = topo.clusters_per_cell;
  table.t.resize(static_cast<size_t>(topo.g) * topo.g * topo.clusters_per_cell);
  for (int l = 0; l < topo.g; ++l)
    for (int b = 0; b < topo.g; ++b)
      for (int c = 0; c < topo.clusters_per_cell; ++c)
        table.at(l, b, c) = correlate(steering, nodes, weights, topo.ring_params(l, b, c));
  return table;
}

const Eigen::MatrixXcd& CorrelationSqrtTable::at(int bs, int cell, int cluster) const {
  return s.at((static_cast<size_t>(bs) * g + cell) * clusters_per_cell + cluster);
}

CorrelationSqrtTable sqrt_table(const CorrelationTable& corr) {
  CorrelationSqrtTable out;
  out.g = corr.g;
  out.clusters_per_cell = corr.clusters_per_cell;
  out.s.reserve(corr.t.size());
  for (const auto& c : corr.t) out.s.push_back(hermitian_sqrt(c.t));
  return out;
}

FadingState FadingState::init(int n_users, int n_r, int n_t, double speed_mps, double carrier_hz,
                              double subframe_duration, const Rng& rng) {
  if (n_users < 1 || n_r < 1 || n_t < 1) throw ValidationError("FadingState: bad counts");
  FadingState f;
  f.doppler_hz = speed_mps * carrier_hz / kLightSpeed;
  f.subframe_duration = subframe_duration;
  f.rho_temporal = std::cyl_bessel_j(0.0, 2.0 * kPi * f.doppler_hz * subframe_duration);
  f.n_r = n_r;
  f.n_t = n_t;
  for (int u = 0; u < n_users; ++u) {
    f.streams.push_back(rng.derive(u));
    f.h_w.push_back(f.streams.back().cnormal_matrix(n_r, n_t));
  }
  return f;
}

void advance_fading(FadingState& f) {
  const double rho = f.rho_temporal;
  const double innov = std::sqrt(std::max(0.0, 1.0 - rho * rho));
  for (size_t u = 0; u < f.h_w.size(); ++u)
    f.h_w[u] = rho * f.h_w[u] + innov * f.streams[u].cnormal_matrix(f.n_r, f.n_t);
}

Eigen::MatrixXcd channel_realization(const Eigen::MatrixXcd& h_w, const CorrelationMatrix& t,
                                     double gain) {
  if (h_w.cols() != t.t.rows())
    throw DimensionError("channel_realization: h_w columns must match the correlation size");
  return channel_realization_sqrt(h_w, hermitian_sqrt(t.t), gain);
}

Eigen::MatrixXcd channel_realization_sqrt(const Eigen::MatrixXcd& h_w,
                                          const Eigen::MatrixXcd& t_sqrt, double gain) {
  if (!(gain > 0.0)) throw ValidationError("channel_realization: gain must be positive");
  return std::sqrt(gain) * h_w * t_sqrt;
}

const Eigen::MatrixXcd& ChannelSet::at(int bs, int cell, int user) const {
  return h.at((static_cast<size_t>(bs) * g + cell) * users_per_cell + user);
}
Eigen::MatrixXcd& ChannelSet::at(int bs, int cell, int user) {
  return h.at((static_cast<size_t>(bs) * g + cell) * users_per_cell + user);
}

ChannelSet realize_channels(const NetworkTopology& topo, const CorrelationSqrtTable& sqrts,
                            const FadingState& fading) {
  ChannelSet set;
  set.g = topo.g;
  set.users_per_cell = topo.users_per_cell();
  set.h.resize(static_cast<size_t>(topo.g) * topo.g * set.users_per_cell);
  for (int l = 0; l < topo.g; ++l)
    for (int b = 0; b < topo.g; ++b)
      for (int u = 0; u < set.users_per_cell; ++u)
        set.at(l, b, u) = channel_realization_sqrt(
            fading.h_w[static_cast<size_t>(b) * set.users_per_cell + u],
            sqrts.at(l, b, u / topo.k), topo.gain(l, b, u));
  return set;
}

std::string NetworkTopology::to_json() const {
  Json j;
  j["schema_version"] = 1;
  j["g"] = g;
  j["clusters_per_cell"] = clusters_per_cell;
  j["k"] = k;
  j["seed"] = seed;
  j["noise_ref"] = noise_ref;
  j["config"] = {{"inter_site_distance", cfg.inter_site_distance},
                 {"pathloss_exponent", cfg.pathloss_exponent},
                 {"scatter_radius", cfg.scatter_radius},
                 {"angular_spread_deg", cfg.angular_spread_deg},
                 {"geometric_spread", cfg.geometric_spread},
                 {"speed_mps", cfg.speed_mps},
                 {"bs_exclusion", cfg.bs_exclusion}};
  j["bs_positions"] = Json::array();
  for (const auto& p : bs_positions) j["bs_positions"].push_back(vec2_json(p));
  j["clusters"] = Json::array();
  for (const auto& cell : clusters) {
    Json jc = Json::array();
    for (const auto& cl : cell) {
      Json e;
      e["center"] = vec2_json(cl.center);
      e["velocity"] = vec2_json(cl.velocity);
      e["user_offsets"] = Json::array();
      for (const auto& off : cl.user_offsets) e["user_offsets"].push_back(vec2_json(off));
      jc.push_back(std::move(e));
    }
    j["clusters"].push_back(std::move(jc));
  }
  return j.dump(2);
}

NetworkTopology NetworkTopology::from_json(const std::string& text) {
  Json j;
  try {
    j = Json::parse(text);
  } catch (const Json::exception& e) {
    throw ValidationError(std::string("NetworkTopology::from_json: ") + e.what());
  }
  NetworkTopology topo;
  topo.g = j.at("g").get<int>();
  topo.clusters_per_cell = j.at("clusters_per_cell").get<int>();
  topo.k = j.at("k").get<int>();
  topo.seed = j.at("seed").get<std::uint64_t>();
  topo.noise_ref = j.at("noise_ref").get<double>();
  const Json& jc = j.at("config");
  topo.cfg.inter_site_distance = jc.at("inter_site_distance").get<double>();
  topo.cfg.pathloss_exponent = jc.at("pathloss_exponent").get<double>();
  topo.cfg.scatter_radius = jc.at("scatter_radius").get<double>();
  topo.cfg.angular_spread_deg = jc.at("angular_spread_deg").get<double>();
  topo.cfg.geometric_spread = jc.at("geometric_spread").get<bool>();
  topo.cfg.speed_mps = jc.at("speed_mps").get<double>();
  topo.cfg.bs_exclusion = jc.at("bs_exclusion").get<double>();
  for (const auto& p : j.at("bs_positions")) topo.bs_positions.push_back(json_vec2(p));
  for (const auto& cell : j.at("clusters")) {
    std::vector<Cluster> cl_list;
    for (const auto& e : cell) {
      Cluster cl;
      cl.center = json_vec2(e.at("center"));
      cl.velocity = json_vec2(e.at("velocity"));
      for (const auto& off : e.at("user_offsets")) cl.user_offsets.push_back(json_vec2(off));
      cl_list.push_back(std::move(cl));
    }
    topo.clusters.push_back(std::move(cl_list));
  }
  return topo;
}

}  // namespace twotier::channel
