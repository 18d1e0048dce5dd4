#include <cmath>
#include <complex>

#include "doctest.h"
#include "test_util.hpp"
#include "twotier/tracker.hpp"

using namespace twotier;
using namespace twotier::track;
using Eigen::MatrixXcd;
using Eigen::VectorXcd;
using Eigen::VectorXd;

namespace {

LinearOp matrix_op(const MatrixXcd& a) {
  return [a](const VectorXcd& v) { return VectorXcd(a * v); };
}
LinearOp matrix_adjoint_op(const MatrixXcd& a) {
  return [a](const VectorXcd& v) { return VectorXcd(a.adjoint() * v); };
}

// smooth unitary family s -> w * exp(i s d) * w^H built from a random
// Hermitian generator; exact unitary for every s
struct UnitaryFamily {
  MatrixXcd w;
  VectorXd d;

  static UnitaryFamily random(int n, Rng& rng) {
    Eigen::SelfAdjointEigenSolver<MatrixXcd> es(testutil::random_hermitian(rng, n));
    return UnitaryFamily{es.eigenvectors(), es.eigenvalues()};
  }
  MatrixXcd at(double s) const {
    VectorXcd ph(d.size());
    for (Eigen::Index j = 0; j < d.size(); ++j) ph(j) = std::polar(1.0, s * d(j));
    return w * ph.asDiagonal() * w.adjoint();
  }
};

double objective(const MatrixXcd& q, const MatrixXcd& basis) {
  return (basis.adjoint() * q * basis).trace().real();
}

}  // namespace

TEST_CASE("normal-equation conjugate gradient: identity, diagonal, least squares") {
  Rng rng(401);
  const VectorXcd b = rng.cnormal_matrix(4, 1);

  // identity operator converges in one step
  const MatrixXcd eye = MatrixXcd::Identity(4, 4);
  CgResult r1 = cg_solve(matrix_op(eye), matrix_adjoint_op(eye), b, 1);
  CHECK((r1.x - b).norm() < 1e-12 * b.norm());
  CHECK(r1.residual_norm < 1e-12 * b.norm());
  CHECK(r1.iterations == 1);
  CHECK_FALSE(r1.no_progress);

  // diagonal system is exact once every distinct squared eigenvalue is visited
  MatrixXcd diag = MatrixXcd::Zero(4, 4);
  for (int i = 0; i < 4; ++i) diag(i, i) = double(i + 1);
  CgResult r2 = cg_solve(matrix_op(diag), matrix_adjoint_op(diag), b, 4);
  VectorXcd exact(4);
  for (int i = 0; i < 4; ++i) exact(i) = b(i) / double(i + 1);
  CHECK((r2.x - exact).norm() < 1e-10 * exact.norm());

  // singular operator: converges to the least-squares solution
  MatrixXcd sing = MatrixXcd::Zero(2, 2);
  sing(0, 0) = 1.0;
  VectorXcd ones(2);
  ones << 1.0, 1.0;
  CgResult r3 = cg_solve(matrix_op(sing), matrix_adjoint_op(sing), ones, 5);
  CHECK(std::abs(r3.x(0) - std::complex<double>(1.0, 0.0)) < 1e-12);
  CHECK(std::abs(r3.x(1)) < 1e-12);  // no component in the null space
  CHECK(r3.residual_norm == doctest::Approx(1.0).epsilon(1e-12));
}

TEST_CASE("normal-equation conjugate gradient: monotone residual, edge cases") {
  Rng rng(402);
  const MatrixXcd a = testutil::random_matrix(rng, 6, 6);
  const VectorXcd b = rng.cnormal_matrix(6, 1);

  double prev = 1e300;
  for (int depth = 0; depth <= 6; ++depth) {
    CgResult r = cg_solve(matrix_op(a), matrix_adjoint_op(a), b, depth);
    CHECK(r.residual_norm <= prev + 1e-12);
    // the reported residual matches the definition
    CHECK((b - a * r.x).norm() == doctest::Approx(r.residual_norm).epsilon(1e-8));
    prev = r.residual_norm;
  }
  CgResult full = cg_solve(matrix_op(a), matrix_adjoint_op(a), b, 6);
  CHECK(full.residual_norm < 1e-8 * b.norm());

  // zero data is already solved, zero operator cannot progress
  CgResult z1 = cg_solve(matrix_op(a), matrix_adjoint_op(a), VectorXcd::Zero(6), 3);
  CHECK(z1.x.norm() == 0.0);
  CHECK_FALSE(z1.no_progress);
  const MatrixXcd zero = MatrixXcd::Zero(6, 6);
  CgResult z2 = cg_solve(matrix_op(zero), matrix_adjoint_op(zero), b, 3);
  CHECK(z2.no_progress);
  CHECK(z2.x.norm() == 0.0);
  CHECK(z2.residual_norm == doctest::Approx(b.norm()).epsilon(1e-15));

  CHECK_THROWS_AS(cg_solve(matrix_op(a), matrix_adjoint_op(a), b, -1), ValidationError);
}

TEST_CASE("spectral radius estimate tracks the extreme eigenvalue") {
  Rng rng(403);
  VectorXd spectrum(6);
  spectrum << -5.0, -0.1, 0.0, 0.02, 0.05, 0.1;  // radius 5, well gapped
  const MatrixXcd q = testutil::hermitian_with_spectrum(rng, spectrum);
  MacCount macs;
  Rng prng = rng.derive(1);
  const double rho = spectral_radius_estimate(q, prng, 10, macs);
  CHECK(rho == doctest::Approx(5.0).epsilon(1e-6));
  CHECK(macs.value == 10 * 36);

  MacCount macs2;
  Rng prng2 = rng.derive(2);
  CHECK(spectral_radius_estimate(MatrixXcd::Zero(4, 4), prng2, 10, macs2) == 0.0);
  CHECK_THROWS_AS(spectral_radius_estimate(testutil::random_matrix(rng, 3, 3), prng, 10, macs),
                  ValidationError);
}

TEST_CASE("gradient step: hand-worked case and oracle fixed point") {
  // q = diag(0, 2), phi = (1,1)/sqrt(2), gamma = 1/4:
  // phi - gamma q phi = (1, 1/2)/sqrt(2), normalized (2, 1)/sqrt(5)
  MatrixXcd q = MatrixXcd::Zero(2, 2);
  q(1, 1) = 2.0;
  MatrixXcd v(2, 1);
  v << 1.0 / std::sqrt(2.0), 1.0 / std::sqrt(2.0);
  MacCount macs;
  const manifold::SubspacePoint out =
      gradient_step(manifold::SubspacePoint(v), q, 0.25, macs);
  CHECK(std::abs(out.basis(0, 0) - 2.0 / std::sqrt(5.0)) < 1e-14);
  CHECK(std::abs(out.basis(1, 0) - 1.0 / std::sqrt(5.0)) < 1e-14);
  CHECK(macs.value == 4 + 2 + 4);  // multiply, scale, thin QR on 2 x 1

  // an exact eigenbasis does not move
  Rng rng(404);
  const MatrixXcd g = testutil::hermitian_with_gap(rng, 8, 3, 1.0);
  const manifold::SubspacePoint star = oracle_outer(g, 3);
  MacCount macs2;
  const manifold::SubspacePoint moved = gradient_step(star, g, 0.1, macs2);
  CHECK(manifold::subspace_distance(star, moved) < 1e-12);
}

TEST_CASE("gradient step with a spectral step size never raises the objective") {
  Rng rng(405);
  for (int trial = 0; trial < 20; ++trial) {
    const MatrixXcd q = testutil::random_hermitian(rng, 10);
    const manifold::SubspacePoint phi(testutil::random_orthonormal(rng, 10, 3));
    MacCount macs;
    Rng prng = rng.derive(100 + trial);
    const double rho = spectral_radius_estimate(q, prng, 10, macs);
    const double gamma = 0.5 / rho;
    const manifold::SubspacePoint next = gradient_step(phi, q, gamma, macs);
    CHECK(objective(q, next.basis) <= objective(q, phi.basis) + 1e-12);
  }
}

TEST_CASE("compensation: fixed point when the statistics do not move") {
  Rng rng(406);
  const MatrixXcd q = testutil::hermitian_with_gap(rng, 8, 2, 0.8);
  const manifold::SubspacePoint star = oracle_outer(q, 2);
  MacCount macs;
  const CompensationOutcome out = compensation_step(star, q, q, 8, macs);
  CHECK(out.compensation_norm < 1e-10);
  CHECK((out.phi_one - star.basis).norm() < 1e-10);
  CHECK(out.gradient_norm < 1e-10);
  CHECK_FALSE(out.degenerate);
}

TEST_CASE("compensation: first-order exact under a small statistics rotation") {
  Rng rng(407);
  const int n = 8, m = 2;
  const MatrixXcd q0 = testutil::hermitian_with_gap(rng, n, m, 1.0);
  const UnitaryFamily fam = UnitaryFamily::random(n, rng);
  const double eps = 1e-3;
  const MatrixXcd u = fam.at(eps);
  const MatrixXcd q1 = u * q0 * u.adjoint();

  const manifold::SubspacePoint start = oracle_outer(q0, m);
  const manifold::SubspacePoint target = oracle_outer(q1, m);
  const double drift = manifold::subspace_distance(start, target);
  REQUIRE(drift > 1e-5);  // the rotation actually moved the subspace

  MacCount macs;
  const CompensationOutcome out = compensation_step(start, q0, q1, n, macs);
  const manifold::SubspacePoint corrected = manifold::retract_qr(out.phi_one);
  // the correction removes the O(eps) error and leaves O(eps^2)
  CHECK(manifold::subspace_distance(corrected, target) < 0.05 * drift);
  CHECK(out.cg_residual_max < 1e-8);
  CHECK_FALSE(out.degenerate);
}

TEST_CASE("compensation solves are exact at full conjugate-gradient depth") {
  Rng rng(408);
  for (int trial = 0; trial < 10; ++trial) {
    const int n = 6, m = 2;
    const MatrixXcd q0 = testutil::hermitian_with_gap(rng, n, m, 0.6);
    const MatrixXcd q1 = q0 + 0.05 * testutil::random_hermitian(rng, n);
    const manifold::SubspacePoint phi = oracle_outer(q0, m);
    MacCount macs;
    const CompensationOutcome out = compensation_step(phi, q0, q1, n, macs);
    const double scale = (q1 - q0).norm();
    CHECK(out.cg_residual_max < 1e-8 * std::max(1.0, scale));
  }
}

TEST_CASE("compensation flags a vanishing shifted operator") {
  // previous statistics are zero and the compressed current statistics vanish,
  // so every shifted operator is exactly zero while the data is not
  const int n = 4, m = 2;
  MatrixXcd phi0 = MatrixXcd::Zero(n, m);
  phi0(0, 0) = 1.0;
  phi0(1, 1) = 1.0;
  MatrixXcd q_now = MatrixXcd::Zero(n, n);
  q_now(2, 0) = 1.0;  // e3 e1^H + e1 e3^H couples the subspace to its complement
  q_now(0, 2) = 1.0;
  MacCount macs;
  const CompensationOutcome out =
      compensation_step(manifold::SubspacePoint(phi0), MatrixXcd::Zero(n, n), q_now, 2, macs);
  CHECK(out.degenerate);
  CHECK(out.compensation_norm == 0.0);
  CHECK(out.gradient_norm > 0.5);
}

TEST_CASE("tracking is equivariant under a unitary change of coordinates") {
  Rng rng(409);
  const int n = 7, m = 2;
  const MatrixXcd q0 = testutil::random_hermitian(rng, n);
  const MatrixXcd q1 = q0 + 0.2 * testutil::random_hermitian(rng, n);
  const MatrixXcd phi0 = testutil::random_orthonormal(rng, n, m);
  const MatrixXcd u = testutil::random_orthonormal(rng, n, n);

  // fixed step keeps both runs free of randomized estimates
  TrackerState plain(manifold::SubspacePoint(phi0), q0, GammaPolicy::fixed(0.05), 2, 1);
  TrackerState rotated(manifold::SubspacePoint(u * phi0), MatrixXcd(u * q0 * u.adjoint()),
                       GammaPolicy::fixed(0.05), 2, 1);
  track_superframe(plain, q1, TrackMode::compensated);
  track_superframe(rotated, MatrixXcd(u * q1 * u.adjoint()), TrackMode::compensated);

  const manifold::SubspacePoint mapped(u * plain.phi.basis);
  // the chordal metric square-roots a roundoff-level quantity, so agreement
  // to working precision shows up as ~sqrt(eps)
  CHECK(manifold::subspace_distance(mapped, rotated.phi) < 1e-7);
}

TEST_CASE("tracking is deterministic for a fixed seed") {
  Rng rng(410);
  const int n = 6, m = 2;
  const MatrixXcd q0 = testutil::hermitian_with_gap(rng, n, m, 0.5);
  const MatrixXcd q1 = q0 + 0.1 * testutil::random_hermitian(rng, n);
  const manifold::SubspacePoint phi0 = oracle_outer(q0, m);

  TrackerState a(phi0, q0, GammaPolicy::spectral(), 1, 99);
  TrackerState b(phi0, q0, GammaPolicy::spectral(), 1, 99);
  const StepInfo ia = track_superframe(a, q1, TrackMode::compensated);
  const StepInfo ib = track_superframe(b, q1, TrackMode::compensated);
  CHECK((a.phi.basis - b.phi.basis).norm() == 0.0);
  CHECK(ia.gamma == ib.gamma);
  CHECK(ia.macs == ib.macs);
}

TEST_CASE("per-superframe multiply counts are pinned to the operation list") {
  Rng rng(411);
  const int n = 5, m = 2;
  const MatrixXcd q0 = testutil::hermitian_with_gap(rng, n, m, 0.7);
  const MatrixXcd q1 = q0 + 0.1 * testutil::random_hermitian(rng, n);
  const manifold::SubspacePoint phi0 = oracle_outer(q0, m);

  // compensated, spectral step, n_cg = 1:
  //   power method        10 n^2           = 250
  //   gradients           2(mn^2+m^2n+nm^2) = 280
  //   compressed eig      9 m^3            = 72
  //   projector           mn^2             = 50
  //   shifted base        n^3              = 125
  //   rhs rotation        nm^2             = 20
  //   per-column shift    m n^2            = 50
  //   cg applies          3m n^2           = 150
  //   correction          nm^2             = 20
  //   descent + QR        mn^2 + nm + 2nm^2 = 100
  TrackerState comp(phi0, q0, GammaPolicy::spectral(), 1, 7);
  const StepInfo ci = track_superframe(comp, q1, TrackMode::compensated);
  CHECK(ci.macs == 1017);
  CHECK(comp.macs.value == 1017);

  // gradient only: 10n^2 + mn^2 + m^2n + nm^2 + nm + 2nm^2 = 390
  TrackerState grad(phi0, q0, GammaPolicy::spectral(), 1, 7);
  const StepInfo gi = track_superframe(grad, q1, TrackMode::gradient_only);
  CHECK(gi.macs == 390);

  // fixed step drops exactly the power-method share
  TrackerState fixed(phi0, q0, GammaPolicy::fixed(0.1), 1, 7);
  const StepInfo fi = track_superframe(fixed, q1, TrackMode::compensated);
  CHECK(fi.macs == 1017 - 250);
}

TEST_CASE("compensated tracking beats gradient-only on rotating statistics") {
  Rng rng(412);
  const int n = 8, m = 2;
  const MatrixXcd q0 = testutil::hermitian_with_gap(rng, n, m, 1.0);
  const UnitaryFamily fam = UnitaryFamily::random(n, rng);
  const double eps = 0.05;

  const manifold::SubspacePoint phi0 = oracle_outer(q0, m);
  TrackerState comp(phi0, q0, GammaPolicy::spectral(), 1, 3);
  TrackerState grad(phi0, q0, GammaPolicy::spectral(), 1, 3);

  double comp_err = 0.0, grad_err = 0.0;
  for (int t = 1; t <= 40; ++t) {
    const MatrixXcd u = fam.at(eps * t);
    const MatrixXcd qt = u * q0 * u.adjoint();
    track_superframe(comp, qt, TrackMode::compensated);
    track_superframe(grad, qt, TrackMode::gradient_only);
    if (t > 20) {  // steady state only
      const manifold::SubspacePoint target = oracle_outer(qt, m);
      comp_err += manifold::subspace_distance(comp.phi, target);
      grad_err += manifold::subspace_distance(grad.phi, target);
    }
  }
  CHECK(comp_err < 0.8 * grad_err);
}

TEST_CASE("tracker interface rejects malformed inputs") {
  Rng rng(413);
  const MatrixXcd q = testutil::random_hermitian(rng, 4);
  const manifold::SubspacePoint phi(testutil::random_orthonormal(rng, 4, 2));

  CHECK_THROWS_AS(GammaPolicy::fixed(0.0), ValidationError);
  CHECK_THROWS_AS(GammaPolicy::spectral(0.0), ValidationError);
  CHECK_THROWS_AS(GammaPolicy::spectral(1.5), ValidationError);

  MacCount macs;
  CHECK_THROWS_AS(gradient_step(phi, testutil::random_matrix(rng, 4, 4), 0.1, macs),
                  ValidationError);
  CHECK_THROWS_AS(gradient_step(phi, testutil::random_hermitian(rng, 5), 0.1, macs),
                  DimensionError);
  CHECK_THROWS_AS(compensation_step(phi, q, testutil::random_hermitian(rng, 5), 1, macs),
                  DimensionError);
  CHECK_THROWS_AS(TrackerState(phi, testutil::random_hermitian(rng, 5), GammaPolicy::spectral(),
                               1, 0),
                  DimensionError);
  TrackerState st(phi, q, GammaPolicy::spectral(), 1, 0);
  CHECK_THROWS_AS(track_superframe(st, testutil::random_matrix(rng, 4, 4), TrackMode::compensated),
                  ValidationError);
}
