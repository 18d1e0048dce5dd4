#include <complex>

#include "doctest.h"
#include "test_util.hpp"
#include "twotier/channel.hpp"
#include "twotier/covariance.hpp"
#include "twotier/manifold.hpp"

using namespace twotier;
using namespace twotier::channel;
using namespace twotier::cov;
using Eigen::MatrixXcd;

TEST_CASE("per-antenna covariance: closed form and sampled agreement") {
  Rng rng(301);
  CorrelationMatrix eye;
  eye.t = MatrixXcd::Identity(4, 4);

  // E[H^H H] = n_r * gain * T; identity correlation makes this transparent
  CHECK((per_ms_covariance(eye, 1.0, 2) - 2.0 * MatrixXcd::Identity(4, 4)).norm() < 1e-14);
  CHECK((per_ms_covariance(eye, 3.0, 1) - 3.0 * MatrixXcd::Identity(4, 4)).norm() < 1e-14);

  CorrelationMatrix t;
  const MatrixXcd b = rng.cnormal_matrix(4, 4);
  t.t = b * b.adjoint();
  const MatrixXcd exact = per_ms_covariance(t, 0.7, 2);
  CHECK(exact.trace().real() == doctest::Approx(2.0 * 0.7 * t.t.trace().real()).epsilon(1e-12));
  CHECK((exact - exact.adjoint()).norm() < 1e-12);

  const MatrixXcd sampled = per_ms_covariance_sampled(t, 0.7, 2, 10000, rng);
  CHECK((sampled - exact).norm() < 0.05 * exact.norm());
  CHECK((sampled - sampled.adjoint()).norm() < 1e-12 * sampled.norm());

  CHECK_THROWS_AS(per_ms_covariance_sampled(t, 0.7, 2, 0, rng), ValidationError);
  CHECK_THROWS_AS(per_ms_covariance(t, -1.0, 2), ValidationError);
}

TEST_CASE("per-link table: bounds checks and missing-entry reporting") {
  PerMsTable table(2, 3);
  table.set(0, 1, 2, MatrixXcd::Identity(4, 4));
  CHECK(table.at(0, 1, 2).rows() == 4);
  CHECK_THROWS_AS(table.at(2, 0, 0), DimensionError);
  CHECK_THROWS_AS(table.at(0, 3, 0), DimensionError);
  CHECK_THROWS_WITH_AS(table.at(1, 1, 1), doctest::Contains("(bs 1, cell 1, user 1)"),
                       ValidationError);
}

TEST_CASE("statistics assembly: leakage minus weighted direct term") {
  const int n_t = 3;
  const MatrixXcd eye = MatrixXcd::Identity(n_t, n_t);

  // single cell: no interference, objective matrix is pure (negated) direct statistics
  PerMsTable solo(1, 2);
  solo.set(0, 0, 0, 2.0 * eye);
  solo.set(0, 0, 1, eye);
  const CovarianceProfile q1 = assemble_q(solo, 0.5, 7);
  REQUIRE(q1.q_per_bs.size() == 1);
  CHECK((q1.q_per_bs[0] + 0.5 * 3.0 * eye).norm() < 1e-14);
  CHECK(q1.weight == 0.5);
  CHECK(q1.superframe_index == 7);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es(q1.q_per_bs[0]);
  CHECK(es.eigenvalues().maxCoeff() <= 1e-14);  // negative semidefinite

  // two symmetric cells with identity statistics and unit weight cancel exactly
  PerMsTable sym(2, 1);
  for (int l = 0; l < 2; ++l)
    for (int b = 0; b < 2; ++b) sym.set(l, b, 0, eye);
  const CovarianceProfile q2 = assemble_q(sym, 1.0);
  CHECK(q2.q_per_bs[0].norm() < 1e-14);
  CHECK(q2.q_per_bs[1].norm() < 1e-14);
  // downstream this is the degenerate case the tracker must flag
  CHECK(manifold::eigh_smallest(q2.q_per_bs[0], 1).degenerate);

  // zero weight keeps only interference: result is positive semidefinite
  PerMsTable duo(2, 1);
  Rng rng(302);
  for (int l = 0; l < 2; ++l)
    for (int b = 0; b < 2; ++b) {
      const MatrixXcd a = rng.cnormal_matrix(n_t, n_t);
      duo.set(l, b, 0, a * a.adjoint());
    }
  const CovarianceProfile q3 = assemble_q(duo, 0.0);
  Eigen::SelfAdjointEigenSolver<MatrixXcd> es3(q3.q_per_bs[0]);
  CHECK(es3.eigenvalues().minCoeff() >= -1e-12 * es3.eigenvalues().cwiseAbs().maxCoeff());

  // incomplete table is refused
  PerMsTable holey(2, 1);
  holey.set(0, 0, 0, eye);
  CHECK_THROWS_AS(assemble_q(holey, 1.0), ValidationError);
  CHECK_THROWS_AS(assemble_q(duo, -0.1), ValidationError);
}

TEST_CASE("statistics assembly is linear in the table and in the weight") {
  Rng rng(303);
  const int n_t = 4;
  auto random_table = [&](PerMsTable& t) {
    for (int l = 0; l < 2; ++l)
      for (int b = 0; b < 2; ++b)
        for (int u = 0; u < 2; ++u) {
          const MatrixXcd a = rng.cnormal_matrix(n_t, n_t);
          t.set(l, b, u, a * a.adjoint());
        }
  };
  PerMsTable ta(2, 2), tb(2, 2), tsum(2, 2);
  random_table(ta);
  random_table(tb);
  for (int l = 0; l < 2; ++l)
    for (int b = 0; b < 2; ++b)
      for (int u = 0; u < 2; ++u) tsum.set(l, b, u, 2.0 * ta.at(l, b, u) + tb.at(l, b, u));

  const double w = 0.8;
  const CovarianceProfile qa = assemble_q(ta, w);
  const CovarianceProfile qb = assemble_q(tb, w);
  const CovarianceProfile qs = assemble_q(tsum, w);
  for (int b = 0; b < 2; ++b)
    CHECK((qs.q_per_bs[b] - 2.0 * qa.q_per_bs[b] - qb.q_per_bs[b]).norm() <
          1e-12 * qs.q_per_bs[b].norm());

  // Q(w) = Q_interference - w * Q_direct, affine in w
  const CovarianceProfile q0 = assemble_q(ta, 0.0);
  const CovarianceProfile q1 = assemble_q(ta, 1.0);
  const CovarianceProfile qh = assemble_q(ta, 0.5);
  for (int b = 0; b < 2; ++b)
    CHECK((qh.q_per_bs[b] - 0.5 * (q0.q_per_bs[b] + q1.q_per_bs[b])).norm() <
          1e-12 * qh.q_per_bs[b].norm());
}

TEST_CASE("exact statistics table from a built network") {
  NetworkConfig cfg;
  const NetworkTopology topo = build_network(3, 1, 2, cfg, 21);
  const ArrayGeometry geom = ArrayGeometry::ula_half_wavelength(6);
  const CorrelationTable corr = correlation_table(topo, geom, 256);

  const PerMsTable table = exact_table(topo, corr, 2);
  for (int l = 0; l < 3; ++l)
    for (int b = 0; b < 3; ++b)
      for (int u = 0; u < 2; ++u) {
        const MatrixXcd& r = table.at(l, b, u);
        CHECK(r.rows() == 6);
        CHECK((r - r.adjoint()).norm() < 1e-12 * r.norm());
        CHECK(r.trace().real() ==
              doctest::Approx(2.0 * topo.gain(l, b, u) * corr.at(l, b, u / 2).t.trace().real())
                  .epsilon(1e-10));
      }

  const CovarianceProfile q = assemble_q(table, 1.0, 3);
  REQUIRE(q.q_per_bs.size() == 3);
  for (const MatrixXcd& qb : q.q_per_bs) CHECK((qb - qb.adjoint()).norm() < 1e-12);
}
