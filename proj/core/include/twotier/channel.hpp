#pragma once

#include <Eigen/Dense>

#include <cstdint>
#include <functional>
#include <string>
#include <vector>

#include "twotier/errors.hpp"
#include "twotier/random.hpp"

namespace twotier::channel {

// Von-Mises power azimuth spectrum of a ring of local scatterers around the
// terminal. The concentration is tied to the angular spread: kappa = (2 delta)^-2.
struct OneRingParams {
  double mean_aod = 0.0;        // radians
  double angular_spread = 0.0;  // delta, radians, in (0, pi)
  double kappa = 0.0;
  double scatter_radius = 0.0;  // meters; 0 when the spread was set directly
  double distance = 0.0;        // BS-to-cluster meters; 0 when the spread was set directly

  static OneRingParams from_spread(double mean_aod, double angular_spread);
  // delta = 2 atan(scatter_radius / distance)
  static OneRingParams from_geometry(double mean_aod, double scatter_radius, double distance);
};

// density over [-pi, pi]; integrates to 1 for any admissible params
double pas_value(double theta, const OneRingParams& p);

struct ArrayGeometry {
  int n_t = 0;
  std::function<Eigen::VectorXd(double)> element_phase;  // departure angle -> n_t phases

  // phi_p(theta) = pi (p-1) sin(theta)
  static ArrayGeometry ula_half_wavelength(int n_t);
};

// Hermitian PSD with unit diagonal
struct CorrelationMatrix {
  Eigen::MatrixXcd t;
};

// composite trapezoid over [-pi, pi]; requires quad_points >= 8 n_t
CorrelationMatrix correlation_matrix(const ArrayGeometry& geom, const OneRingParams& p,
                                     int quad_points = 4096);

// Hermitian PSD square root; eigenvalues slightly negative from roundoff clamp
// to zero, genuinely indefinite input is rejected
Eigen::MatrixXcd hermitian_sqrt(const Eigen::MatrixXcd& t);

struct Cluster {
  Eigen::Vector2d center = Eigen::Vector2d::Zero();
  Eigen::Vector2d velocity = Eigen::Vector2d::Zero();  // fixed heading * speed
  std::vector<Eigen::Vector2d> user_offsets;           // users ride with the center
};

struct NetworkConfig {
  double inter_site_distance = 500.0;
  double pathloss_exponent = 2.6;
  double scatter_radius = 30.0;      // one-ring radius; users drawn on this disc
  double angular_spread_deg = 20.0;  // used when geometric_spread is false
  bool geometric_spread = false;
  double speed_mps = 0.0;
  double bs_exclusion = 35.0;  // cluster centers drawn no closer than this to a BS
};

struct NetworkTopology {
  int g = 0;
  int clusters_per_cell = 0;
  int k = 0;  // users per cluster
  NetworkConfig cfg;
  std::uint64_t seed = 0;
  std::vector<Eigen::Vector2d> bs_positions;
  std::vector<std::vector<Cluster>> clusters;  // [cell][cluster]

  // smallest direct-link raw gain at build time; gains are reported relative
  // to it so the noise power is 1 in normalized units, frozen across drift
  double noise_ref = 1.0;

  int users_per_cell() const { return clusters_per_cell * k; }
  Eigen::Vector2d user_position(int cell, int user) const;
  Eigen::Vector2d user_velocity(int cell, int user) const;
  double raw_gain(int bs, int cell, int user) const;  // distance^(-alpha)
  double gain(int bs, int cell, int user) const;      // raw / noise_ref
  OneRingParams ring_params(int bs, int cell, int cluster) const;

  std::string to_json() const;
  static NetworkTopology from_json(const std::string& text);
};

NetworkTopology build_network(int g, int clusters_per_cell, int k, const NetworkConfig& cfg,
                              std::uint64_t seed);

// displaces every cluster center by velocity * dt; ring parameters and gains
// follow the new geometry on the next query. Users passing within 1 m of a BS
// are clamped to that radius with a warning on stderr.
void advance_topology(NetworkTopology& topo, double dt);

// per-link correlations, observer-major: at(bs l, cell b, cluster c)
struct CorrelationTable {
  int g = 0, clusters_per_cell = 0;
  std::vector<CorrelationMatrix> t;

  const CorrelationMatrix& at(int bs, int cell, int cluster) const;
  CorrelationMatrix& at(int bs, int cell, int cluster);
};

CorrelationTable correlation_table(const NetworkTopology& topo, const ArrayGeometry& geom,
                                   int quad_points = 4096);

// PSD square roots of a correlation table, same layout
struct CorrelationSqrtTable {
  int g = 0, clusters_per_cell = 0;
  std::vector<Eigen::MatrixXcd> s;

  const Eigen::MatrixXcd& at(int bs, int cell, int cluster) const;
};
CorrelationSqrtTable sqrt_table(const CorrelationTable& corr);

// small-scale AR(1) state; one draw per user shared by all observing BSs
struct FadingState {
  double rho_temporal = 0.0;  // J0(2 pi f_d tau)
  double doppler_hz = 0.0;
  double subframe_duration = 0.0;
  int n_r = 0, n_t = 0;
  std::vector<Eigen::MatrixXcd> h_w;  // [cell * users_per_cell + user]
  std::vector<Rng> streams;

  static FadingState init(int n_users, int n_r, int n_t, double speed_mps, double carrier_hz,
                          double subframe_duration, const Rng& rng);
};

// one subframe: h <- rho h + sqrt(1 - rho^2) W; CN(0,1) marginals preserved
void advance_fading(FadingState& f);

// sqrt(gain) * h_w * T^{1/2}
Eigen::MatrixXcd channel_realization(const Eigen::MatrixXcd& h_w, const CorrelationMatrix& t,
                                     double gain);
// same with the square root precomputed (hot path)
Eigen::MatrixXcd channel_realization_sqrt(const Eigen::MatrixXcd& h_w,
                                          const Eigen::MatrixXcd& t_sqrt, double gain);

// realized channels for every (observing BS, cell, user) triple
struct ChannelSet {
  int g = 0, users_per_cell = 0;
  std::vector<Eigen::MatrixXcd> h;

  const Eigen::MatrixXcd& at(int bs, int cell, int user) const;
  Eigen::MatrixXcd& at(int bs, int cell, int user);
};

ChannelSet realize_channels(const NetworkTopology& topo, const CorrelationSqrtTable& sqrts,
                            const FadingState& fading);

}  // namespace twotier::channel
