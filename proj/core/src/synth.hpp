#pragma once

// private helpers for synthetic problem instances (not installed)

#include <Eigen/Dense>

#include "twotier/random.hpp"

namespace twotier::synth {

inline Eigen::MatrixXcd random_unitary(Rng& rng, int n) {
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(rng.cnormal_matrix(n, n));
  return qr.householderQ() * Eigen::MatrixXcd::Identity(n, n);
}

inline Eigen::MatrixXcd random_orthonormal(Rng& rng, int n, int m) {
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(rng.cnormal_matrix(n, m));
  return qr.householderQ() * Eigen::MatrixXcd::Identity(n, m);
}

inline Eigen::MatrixXcd random_hermitian(Rng& rng, int n) {
  const Eigen::MatrixXcd a = rng.cnormal_matrix(n, n);
  return 0.5 * (a + a.adjoint());
}

// m smallest eigenvalues near -1, the rest in [0.5, 1.5]: spectral norm about
// 1.5 and an eigengap of at least 1.4
inline Eigen::MatrixXcd gapped_hermitian(Rng& rng, int n, int m) {
  const Eigen::MatrixXcd u = random_unitary(rng, n);
  Eigen::VectorXd ev(n);
  for (int i = 0; i < n; ++i)
    ev(i) = (i < m) ? -1.0 + 0.1 * rng.uniform() : 0.5 + rng.uniform();
  return u * ev.asDiagonal() * u.adjoint();
}

}  // namespace twotier::synth
