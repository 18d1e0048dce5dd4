#include "twotier/tracker.hpp"

#include <cmath>
#include <utility>

namespace twotier::track {

using Eigen::MatrixXcd;
using Eigen::VectorXcd;

namespace {

constexpr double kTiny = 1e-14;

void require_square_hermitian(const MatrixXcd& q, const char* who) {
  if (q.rows() != q.cols()) throw DimensionError(std::string(who) + ": matrix must be square");
  if (!manifold::is_hermitian(q)) throw ValidationError(std::string(who) + ": matrix must be Hermitian");
}

}  // namespace

GammaPolicy GammaPolicy::fixed(double step) {
  if (!(step > 0.0)) throw ValidationError("GammaPolicy: fixed step must be positive");
  return GammaPolicy{Kind::fixed, step};
}

GammaPolicy GammaPolicy::spectral(double safety) {
  if (!(safety > 0.0 && safety <= 1.0))
    throw ValidationError("GammaPolicy: spectral safety factor must lie in (0, 1]");
  return GammaPolicy{Kind::spectral, safety};
}

CgResult cg_solve(const LinearOp& apply, const LinearOp& adjoint_apply, const VectorXcd& b,
                  int n_iter) {
  if (n_iter < 0) throw ValidationError("cg_solve: n_iter must be nonnegative");
  CgResult out;
  const double b_norm = b.norm();
  VectorXcd r = b;
  VectorXcd s = adjoint_apply(r);
  out.x = VectorXcd::Zero(s.size());
  out.residual_norm = b_norm;
  if (b_norm == 0.0) return out;

  double gamma = s.squaredNorm();
  if (gamma <= kTiny * kTiny * std::max(1.0, b_norm * b_norm)) {
    out.no_progress = true;  // the operator cannot see the data at all
    return out;
  }
  VectorXcd p = s;
  for (int it = 0; it < n_iter; ++it) {
    const VectorXcd q = apply(p);
    const double qq = q.squaredNorm();
    if (qq <= kTiny * gamma) break;  // Krylov space exhausted
    const double alpha = gamma / qq;
    out.x += alpha * p;
    r -= alpha * q;
    ++out.iterations;
    s = adjoint_apply(r);
    const double gamma_next = s.squaredNorm();
    if (gamma_next <= kTiny * kTiny * b_norm * b_norm) break;
    p = s + (gamma_next / gamma) * p;
    gamma = gamma_next;
  }
  out.residual_norm = r.norm();
  return out;
}

double spectral_radius_estimate(const MatrixXcd& q, Rng& rng, int iters, MacCount& macs) {
  require_square_hermitian(q, "spectral_radius_estimate");
  if (iters < 1) throw ValidationError("spectral_radius_estimate: iters must be positive");
  const int n = static_cast<int>(q.rows());
  VectorXcd v = rng.cnormal_matrix(n, 1);
  const double v_norm = v.norm();
  if (v_norm == 0.0) return 0.0;
  v /= v_norm;
  double radius = 0.0;
  for (int it = 0; it < iters; ++it) {
    const VectorXcd w = q * v;
    macs.gemm(n, n, 1);
    radius = w.norm();
    if (radius <= kTiny) return 0.0;
    v = w / radius;
  }
  return radius;
}

manifold::SubspacePoint oracle_outer(const MatrixXcd& q, int m) {
  return manifold::SubspacePoint(manifold::eigh_smallest(q, m).vectors);
}

manifold::SubspacePoint gradient_step(const manifold::SubspacePoint& phi, const MatrixXcd& q,
                                      double gamma, MacCount& macs) {
  require_square_hermitian(q, "gradient_step");
  if (q.rows() != phi.basis.rows()) throw DimensionError("gradient_step: dimension mismatch");
  const int n = phi.ambient_dim();
  const int m = phi.rank();
  const MatrixXcd c = q * phi.basis;
  macs.gemm(n, n, m);
  const MatrixXcd x = phi.basis - gamma * c;
  macs.scale(n, m);
  macs.qr(n, m);
  return manifold::retract_qr(x);
}

CompensationOutcome compensation_step(const manifold::SubspacePoint& phi, const MatrixXcd& q_prev,
                                      const MatrixXcd& q_now, int n_cg, MacCount& macs) {
  require_square_hermitian(q_prev, "compensation_step");
  require_square_hermitian(q_now, "compensation_step");
  const int n = phi.ambient_dim();
  const int m = phi.rank();
  if (q_prev.rows() != n || q_now.rows() != n)
    throw DimensionError("compensation_step: statistics do not match the subspace dimension");
  if (n_cg < 0) throw ValidationError("compensation_step: n_cg must be nonnegative");

  const MatrixXcd& f = phi.basis;

  // gradient change at the common base point
  const MatrixXcd c_now = q_now * f;
  macs.gemm(n, n, m);
  const MatrixXcd s_now = f.adjoint() * c_now;
  macs.gemm(m, n, m);
  const MatrixXcd g_now = c_now - f * s_now;
  macs.gemm(n, m, m);
  const MatrixXcd c_prev = q_prev * f;
  macs.gemm(n, n, m);
  const MatrixXcd s_prev = f.adjoint() * c_prev;
  macs.gemm(m, n, m);
  const MatrixXcd g_prev = c_prev - f * s_prev;
  macs.gemm(n, m, m);
  const MatrixXcd delta_f = g_now - g_prev;

  // eigendirections of the compressed current statistics decouple the
  // Sylvester system into m independent shifted solves
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(0.5 * (s_now + s_now.adjoint()));
  macs.eig(m);
  const Eigen::VectorXd beta = es.eigenvalues();
  const MatrixXcd basis_rot = es.eigenvectors();

  const MatrixXcd proj = MatrixXcd::Identity(n, n) - f * f.adjoint();
  macs.gemm(n, m, n);
  const MatrixXcd shifted_base = proj * q_prev;
  macs.gemm(n, n, n);
  const MatrixXcd rhs = -(delta_f * basis_rot);
  macs.gemm(n, m, m);

  CompensationOutcome out;
  out.gradient_norm = g_now.norm();
  MatrixXcd y = MatrixXcd::Zero(n, m);
  for (int i = 0; i < m; ++i) {
    const MatrixXcd a_i = shifted_base - beta(i) * proj;
    macs.scale(n, n);
    const LinearOp apply = [&](const VectorXcd& v) {
      macs.gemm(n, n, 1);
      return VectorXcd(a_i * v);
    };
    const LinearOp adjoint_apply = [&](const VectorXcd& v) {
      macs.gemm(n, n, 1);
      return VectorXcd(a_i.adjoint() * v);
    };
    const CgResult cg = cg_solve(apply, adjoint_apply, rhs.col(i), n_cg);
    y.col(i) = cg.x;
    out.degenerate = out.degenerate || cg.no_progress;
    out.cg_residual_max = std::max(out.cg_residual_max, cg.residual_norm);
  }
  const MatrixXcd correction = y * basis_rot.adjoint();
  macs.gemm(n, m, m);
  out.phi_one = f + correction;
  out.compensation_norm = correction.norm();
  return out;
}

TrackerState::TrackerState(manifold::SubspacePoint phi0, MatrixXcd q0, GammaPolicy g, int n_cg_,
                           uint64_t seed)
    : phi(std::move(phi0)), q_prev(std::move(q0)), gamma(g), n_cg(n_cg_), rng(seed) {
  require_square_hermitian(q_prev, "TrackerState");
  if (q_prev.rows() != phi.basis.rows())
    throw DimensionError("TrackerState: statistics do not match the subspace dimension");
  if (n_cg < 0) throw ValidationError("TrackerState: n_cg must be nonnegative");
}

StepInfo track_superframe(TrackerState& st, const MatrixXcd& q_now, TrackMode mode) {
  require_square_hermitian(q_now, "track_superframe");
  const int n = st.phi.ambient_dim();
  const int m = st.phi.rank();
  if (q_now.rows() != n) throw DimensionError("track_superframe: dimension mismatch");

  const long long macs_before = st.macs.value;
  StepInfo info;

  if (st.gamma.kind == GammaPolicy::Kind::spectral) {
    Rng power_rng = st.rng.derive(static_cast<uint64_t>(st.superframe));
    const double radius = spectral_radius_estimate(q_now, power_rng, 10, st.macs);
    info.gamma = radius > 0.0 ? st.gamma.value / radius : st.gamma.value;
  } else {
    info.gamma = st.gamma.value;
  }

  if (mode == TrackMode::compensated) {
    const CompensationOutcome comp = compensation_step(st.phi, st.q_prev, q_now, st.n_cg, st.macs);
    info.gradient_norm = comp.gradient_norm;
    info.compensation_norm = comp.compensation_norm;
    info.degenerate = comp.degenerate;
    const MatrixXcd eta = q_now * comp.phi_one;
    st.macs.gemm(n, n, m);
    const MatrixXcd x = comp.phi_one - info.gamma * eta;
    st.macs.scale(n, m);
    st.macs.qr(n, m);
    st.phi = manifold::retract_qr(x);
  } else {
    const MatrixXcd c = q_now * st.phi.basis;
    st.macs.gemm(n, n, m);
    const MatrixXcd s = st.phi.basis.adjoint() * c;
    st.macs.gemm(m, n, m);
    info.gradient_norm = (c - st.phi.basis * s).norm();
    st.macs.gemm(n, m, m);
    const MatrixXcd x = st.phi.basis - info.gamma * c;
    st.macs.scale(n, m);
    st.macs.qr(n, m);
    st.phi = manifold::retract_qr(x);
  }

  st.q_prev = q_now;
  st.superframe += 1;
  info.macs = st.macs.value - macs_before;
  return info;
}

}  // namespace twotier::track
