#include "twotier/covariance.hpp"

#include <string>

namespace twotier::cov {

Eigen::MatrixXcd per_ms_covariance(const channel::CorrelationMatrix& t, double gain, int n_r) {
  if (n_r < 1) throw ValidationError("per_ms_covariance: n_r must be positive");
  if (!(gain > 0.0)) throw ValidationError("per_ms_covariance: gain must be positive");
  return static_cast<double>(n_r) * gain * t.t;
}

Eigen::MatrixXcd per_ms_covariance_sampled(const channel::CorrelationMatrix& t, double gain,
                                           int n_r, int n_samples, Rng& rng) {
  if (n_samples < 1) throw ValidationError("per_ms_covariance_sampled: n_samples must be >= 1");
  const Eigen::MatrixXcd root = channel::hermitian_sqrt(t.t);
  const Eigen::Index n_t = t.t.rows();
  Eigen::MatrixXcd acc = Eigen::MatrixXcd::Zero(n_t, n_t);
  for (int s = 0; s < n_samples; ++s) {
    const Eigen::MatrixXcd h =
        channel::channel_realization_sqrt(rng.cnormal_matrix(n_r, n_t), root, gain);
    acc.noalias() += h.adjoint() * h;
  }
  acc /= static_cast<double>(n_samples);
  return (acc + acc.adjoint()) / 2.0;
}

PerMsTable::PerMsTable(int g, int users_per_cell) : g(g), users_per_cell(users_per_cell) {
  if (g < 1 || users_per_cell < 1) throw ValidationError("PerMsTable: counts must be positive");
  const size_t n = static_cast<size_t>(g) * g * users_per_cell;
  q_.resize(n);
  present_.assign(n, 0);
}

size_t PerMsTable::index(int bs, int cell, int user) const {
  if (bs < 0 || bs >= g || cell < 0 || cell >= g || user < 0 || user >= users_per_cell)
    throw DimensionError("PerMsTable: index (" + std::to_string(bs) + ", " + std::to_string(cell) +
                         ", " + std::to_string(user) + ") out of range");
  return (static_cast<size_t>(bs) * g + cell) * users_per_cell + user;
}

void PerMsTable::set(int bs, int cell, int user, Eigen::MatrixXcd value) {
  const size_t i = index(bs, cell, user);
  q_[i] = std::move(value);
  present_[i] = 1;
}

const Eigen::MatrixXcd& PerMsTable::at(int bs, int cell, int user) const {
  const size_t i = index(bs, cell, user);
  if (!present_[i])
    throw ValidationError("PerMsTable: missing covariance for (bs " + std::to_string(bs) +
                          ", cell " + std::to_string(cell) + ", user " + std::to_string(user) +
                          ")");
  return q_[i];
}

CovarianceProfile assemble_q(const PerMsTable& per_ms, double w, int superframe_index) {
  if (!(w >= 0.0)) throw ValidationError("assemble_q: weight must be nonnegative");
  CovarianceProfile profile;
  profile.weight = w;
  profile.superframe_index = superframe_index;
  profile.q_per_bs.reserve(per_ms.g);
  for (int b = 0; b < per_ms.g; ++b) {
    Eigen::MatrixXcd q;
    for (int l = 0; l < per_ms.g; ++l) {
      const double scale = (l == b) ? -w : 1.0;
      for (int u = 0; u < per_ms.users_per_cell; ++u) {
        const Eigen::MatrixXcd& term = per_ms.at(b, l, u);
        if (q.size() == 0) q = Eigen::MatrixXcd::Zero(term.rows(), term.cols());
        if (term.rows() != q.rows() || term.cols() != q.cols())
          throw DimensionError("assemble_q: inconsistent covariance dimensions");
        q.noalias() += scale * term;
      }
    }
    profile.q_per_bs.push_back((q + q.adjoint()) / 2.0);
  }
  return profile;
}

PerMsTable exact_table(const channel::NetworkTopology& topo,
                       const channel::CorrelationTable& corr, int n_r) {
  PerMsTable table(topo.g, topo.users_per_cell());
  for (int l = 0; l < topo.g; ++l)
    for (int b = 0; b < topo.g; ++b)
      for (int u = 0; u < topo.users_per_cell(); ++u)
        table.set(l, b, u,
                  per_ms_covariance(corr.at(l, b, u / topo.k), topo.gain(l, b, u), n_r));
  return table;
}

}  // namespace twotier::cov
