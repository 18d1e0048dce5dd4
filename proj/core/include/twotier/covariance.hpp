#pragma once

#include <Eigen/Dense>

#include <vector>

#include "twotier/channel.hpp"
#include "twotier/errors.hpp"
#include "twotier/random.hpp"

namespace twotier::cov {

// E[H^H H] seen at one BS for one MS; exact closed form n_r * gain * T
Eigen::MatrixXcd per_ms_covariance(const channel::CorrelationMatrix& t, double gain, int n_r);

// same moment estimated from n_samples independent fading draws
Eigen::MatrixXcd per_ms_covariance_sampled(const channel::CorrelationMatrix& t, double gain,
                                           int n_r, int n_samples, Rng& rng);

// every per-MS covariance, observer-major: at(bs, cell, user)
struct PerMsTable {
  int g = 0, users_per_cell = 0;

  PerMsTable() = default;
  PerMsTable(int g, int users_per_cell);

  void set(int bs, int cell, int user, Eigen::MatrixXcd value);
  const Eigen::MatrixXcd& at(int bs, int cell, int user) const;  // throws when absent

 private:
  std::vector<Eigen::MatrixXcd> q_;
  std::vector<char> present_;
  size_t index(int bs, int cell, int user) const;
};

// interference-minus-weighted-signal matrices, one per BS; may be indefinite
struct CovarianceProfile {
  std::vector<Eigen::MatrixXcd> q_per_bs;
  double weight = 1.0;
  int superframe_index = 0;
};

// Q^[b] = sum_{l != b, u} q(b, l, u) - w * sum_u q(b, b, u)
CovarianceProfile assemble_q(const PerMsTable& per_ms, double w, int superframe_index = 0);

// exact-mode table straight from the model statistics
PerMsTable exact_table(const channel::NetworkTopology& topo,
                       const channel::CorrelationTable& corr, int n_r);

}  // namespace twotier::cov
