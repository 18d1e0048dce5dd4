#pragma once

#include <Eigen/Dense>
#include <vector>

#include "twotier/channel.hpp"
#include "twotier/manifold.hpp"

namespace twotier::precode {

// Over-the-air cost meter: every CSI matrix formed for feedback reports the
// number of complex scalars it would put on the uplink.
struct FeedbackCounter {
  long long complex_scalars = 0;

  void add(long long n) { complex_scalars += n; }
};

// Receive combiner for one user: the d smallest eigenvectors of
//   sum_{l != own} E_l E_l^H - w * E_own E_own^H
// where E_l is the user's effective channel from BS l. Ties resolve to the
// eigensolver's ascending order, so the result is deterministic.
Eigen::MatrixXcd receiver_shaping(const std::vector<Eigen::MatrixXcd>& effective, int own,
                                  double w, int d);

// Effective CSI after combining, u^H h phi, reported to the feedback meter.
Eigen::MatrixXcd effective_channel(const Eigen::MatrixXcd& u, const Eigen::MatrixXcd& h,
                                   const manifold::SubspacePoint& phi,
                                   FeedbackCounter* fb = nullptr);

// Transmit zero-forcing on the stacked per-cell effective rows. The
// pseudo-inverse is rescaled by a single scalar so the radiated power meets
// the budget exactly; the scalar preserves the nulling structure.
Eigen::MatrixXcd inner_zf(const Eigen::MatrixXcd& stacked, double power);

// Full-CSI single-tier baseline. Each user combines with the d dominant left
// singular vectors of its (possibly stale) direct channel; each BS stacks
// every network user's combined rows, pseudo-inverts, keeps the columns of
// its own users, and normalizes its power to the budget. The per-BS scalar
// keeps every cross-cell null intact.
struct OneTierResult {
  std::vector<Eigen::MatrixXcd> precoders;               // per BS: n_t x (k d)
  std::vector<std::vector<Eigen::MatrixXcd>> receivers;  // [cell][user]: n_r x d
};
OneTierResult one_tier_zf(const channel::ChannelSet& csi, int d, double power,
                          FeedbackCounter* fb = nullptr);

// Interference-alignment diagnostics for a set of outer precoders against
// per-ordered-pair link correlations t[l][b] (from BS l to cell b).
struct AlignmentReport {
  Eigen::MatrixXd leakage;       // (l, b): ||t[l][b] phi[l]||_F for l != b, 0 on diagonal
  Eigen::MatrixXd reference;     // (l, b): ||t[l][b]||_F, for relative thresholds
  std::vector<int> direct_rank;  // numerical rank of t[b][b] phi[b] at 1e-6 * sigma_max
};
AlignmentReport alignment_check(const std::vector<std::vector<Eigen::MatrixXcd>>& t,
                                const std::vector<manifold::SubspacePoint>& phi);

}  // namespace twotier::precode
