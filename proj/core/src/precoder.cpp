#include "twotier/precoder.hpp"

#include <cmath>
#include <string>

namespace twotier::precode {

using Eigen::MatrixXcd;
using Eigen::MatrixXd;

MatrixXcd receiver_shaping(const std::vector<MatrixXcd>& effective, int own, double w, int d) {
  if (effective.empty()) throw ValidationError("receiver_shaping: no effective channels");
  if (own < 0 || own >= static_cast<int>(effective.size()))
    throw DimensionError("receiver_shaping: own index out of range");
  const Eigen::Index n_r = effective[own].rows();
  if (d < 1 || d > n_r) throw ValidationError("receiver_shaping: need 1 <= d <= n_r");
  if (!(w >= 0.0)) throw ValidationError("receiver_shaping: weight must be nonnegative");

  MatrixXcd objective = MatrixXcd::Zero(n_r, n_r);
  for (int l = 0; l < static_cast<int>(effective.size()); ++l) {
    if (effective[l].rows() != n_r)
      throw DimensionError("receiver_shaping: inconsistent receive dimension");
    const double sign = (l == own) ? -w : 1.0;
    objective += sign * (effective[l] * effective[l].adjoint());
  }
  return manifold::eigh_smallest(objective, d).vectors;
}

MatrixXcd effective_channel(const MatrixXcd& u, const MatrixXcd& h,
                            const manifold::SubspacePoint& phi, FeedbackCounter* fb) {
  if (u.rows() != h.rows()) throw DimensionError("effective_channel: combiner/channel mismatch");
  if (h.cols() != phi.basis.rows())
    throw DimensionError("effective_channel: channel/subspace mismatch");
  MatrixXcd out = u.adjoint() * h * phi.basis;
  if (fb != nullptr) fb->add(out.size());
  return out;
}

MatrixXcd inner_zf(const MatrixXcd& stacked, double power) {
  if (!(power > 0.0)) throw ValidationError("inner_zf: power budget must be positive");
  if (stacked.rows() > stacked.cols())
    throw DimensionError("inner_zf: more streams than transmit dimensions");
  Eigen::JacobiSVD<MatrixXcd> svd(stacked);
  const Eigen::VectorXd sv = svd.singularValues();
  if (sv(sv.size() - 1) <= 1e-10 * sv(0))
    throw SingularityError("inner_zf: stacked effective channel is row-rank deficient",
                           static_cast<int>(sv.size()) - 1);

  const MatrixXcd gram = stacked * stacked.adjoint();
  const MatrixXcd raw = stacked.adjoint() * gram.llt().solve(MatrixXcd::Identity(
                                                stacked.rows(), stacked.rows()));
  return std::sqrt(power) / raw.norm() * raw;
}

OneTierResult one_tier_zf(const channel::ChannelSet& csi, int d, double power,
                          FeedbackCounter* fb) {
  if (!(power > 0.0)) throw ValidationError("one_tier_zf: power budget must be positive");
  const int g = csi.g;
  const int k = csi.users_per_cell;
  if (g < 1 || k < 1) throw ValidationError("one_tier_zf: empty channel set");
  const Eigen::Index n_r = csi.at(0, 0, 0).rows();
  const Eigen::Index n_t = csi.at(0, 0, 0).cols();
  if (d < 1 || d > n_r) throw ValidationError("one_tier_zf: need 1 <= d <= n_r");
  if (1LL * g * k * d > n_t)
    throw DimensionError("one_tier_zf: total streams exceed transmit dimensions");

  OneTierResult out;
  out.receivers.assign(g, std::vector<MatrixXcd>(k));
  for (int b = 0; b < g; ++b)
    for (int u = 0; u < k; ++u) {
      Eigen::JacobiSVD<MatrixXcd> svd(csi.at(b, b, u), Eigen::ComputeThinU);
      out.receivers[b][u] = svd.matrixU().leftCols(d);
    }

  out.precoders.resize(g);
  for (int l = 0; l < g; ++l) {
    MatrixXcd stacked(g * k * d, n_t);
    for (int b = 0; b < g; ++b)
      for (int u = 0; u < k; ++u) {
        stacked.middleRows((b * k + u) * d, d) =
            out.receivers[b][u].adjoint() * csi.at(l, b, u);
        if (fb != nullptr) fb->add(d * n_t);
      }
    Eigen::JacobiSVD<MatrixXcd> svd(stacked);
    const Eigen::VectorXd sv = svd.singularValues();
    if (sv(sv.size() - 1) <= 1e-10 * sv(0))
      throw SingularityError("one_tier_zf: network stack is row-rank deficient at BS " +
                                 std::to_string(l),
                             l);
    const MatrixXcd gram = stacked * stacked.adjoint();
    const MatrixXcd full = stacked.adjoint() *
                           gram.llt().solve(MatrixXcd::Identity(g * k * d, g * k * d));
    const MatrixXcd own = full.middleCols(l * k * d, k * d);
    out.precoders[l] = std::sqrt(power) / own.norm() * own;
  }
  return out;
}

AlignmentReport alignment_check(const std::vector<std::vector<MatrixXcd>>& t,
                                const std::vector<manifold::SubspacePoint>& phi) {
  const int g = static_cast<int>(phi.size());
  if (static_cast<int>(t.size()) != g)
    throw DimensionError("alignment_check: correlation table does not match precoder count");

  AlignmentReport rep;
  rep.leakage = MatrixXd::Zero(g, g);
  rep.reference = MatrixXd::Zero(g, g);
  rep.direct_rank.assign(g, 0);
  for (int l = 0; l < g; ++l) {
    if (static_cast<int>(t[l].size()) != g)
      throw DimensionError("alignment_check: correlation table row is not square");
    for (int b = 0; b < g; ++b) {
      if (t[l][b].cols() != phi[l].basis.rows())
        throw DimensionError("alignment_check: correlation/precoder dimension mismatch");
      rep.reference(l, b) = t[l][b].norm();
      if (l == b) {
        Eigen::JacobiSVD<MatrixXcd> svd(t[b][b] * phi[b].basis);
        const Eigen::VectorXd sv = svd.singularValues();
        int rank = 0;
        for (Eigen::Index i = 0; i < sv.size(); ++i)
          if (sv(i) > 1e-6 * sv(0)) ++rank;
        rep.direct_rank[b] = sv(0) > 0.0 ? rank : 0;
      } else {
        rep.leakage(l, b) = (t[l][b] * phi[l].basis).norm();
      }
    }
  }
  return rep;
}

}  // namespace twotier::precode
