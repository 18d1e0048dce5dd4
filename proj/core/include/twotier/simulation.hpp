#pragma once

#include <Eigen/Dense>

#include <string>
#include <vector>

#include "twotier/channel.hpp"
#include "twotier/config.hpp"
#include "twotier/counters.hpp"
#include "twotier/manifold.hpp"
#include "twotier/precoder.hpp"

namespace twotier::harness {

// One subframe's transmit side: per-BS antenna-domain precoders with columns
// grouped d per user, plus the receivers the rates are evaluated against.
struct TransmitSet {
  std::vector<Eigen::MatrixXcd> tx;                      // [bs], n_t x (users * d)
  std::vector<std::vector<Eigen::MatrixXcd>> receivers;  // [cell][user], n_r x d
  int d = 1;
};

// Two-tier transmit side for one subframe: receiver shaping per user from the
// current effective channels, then intra-cell ZF inside each cell's subspace.
TransmitSet two_tier_transmit(const channel::ChannelSet& csi,
                              const std::vector<manifold::SubspacePoint>& phis, double w,
                              int d, double power, precode::FeedbackCounter* fb = nullptr);

// Treat-interference-as-noise rates: per user log2 det(I + R^-1 S S^H) with R
// collecting noise plus receiver-projected intra- and inter-cell interference;
// returns the per-cell sums in bits/s/Hz.
Eigen::VectorXd compute_rates(const channel::ChannelSet& csi, const TransmitSet& t,
                              double noise_power);

struct RateSummary {
  std::string scheme;
  double power_db = 0.0;
  double speed_kmh = 0.0;
  double mean_per_cell_rate = 0.0;  // bits/s/Hz, averaged over cells and superframes
  double stderr_rate = 0.0;         // sample standard error across superframes
  int n_superframes = 0;
};

struct DiagnosticsRow {
  int superframe = 0;
  int bs_index = 0;
  double subspace_error = 0.0;  // distance to the same superframe's exact subspace
  double gradient_norm = 0.0;
  double compensation_norm = 0.0;
  bool degenerate_flag = false;
};

struct SimReport {
  int schema_version = 1;
  std::string config_echo;  // key = value form, replayable through parse_config
  std::vector<RateSummary> rates;
  std::vector<DiagnosticsRow> diagnostics;  // tracked scheme vs exact, per superframe and BS
  counters::FeedbackCounts feedback;        // closed-form per-cell per-subframe averages
  counters::ComplexityCounts complexity;
  // instrumented feedback actually incurred, complex scalars per cell per subframe
  double measured_two_tier_feedback = 0.0;
  double measured_one_tier_feedback = 0.0;

  std::string to_json() const;
  std::string rates_csv() const;
  std::string diagnostics_csv() const;
};

// Full run: per superframe advance the topology, rebuild statistics, update each
// scheme's outer subspace; per subframe advance fading, precode, accumulate
// rates. Deterministic given (config, seed).
SimReport run_simulation(const SimConfig& cfg);

}  // namespace twotier::harness
