#pragma once

#include <Eigen/Dense>

#include "twotier/errors.hpp"

namespace twotier::manifold {

// Point on the complex Grassmannian: an n x m matrix with orthonormal
// columns, identified with the subspace it spans. Any right-unitary rotation
// of the basis names the same point; consumers must not depend on the
// particular representative beyond its span.
struct SubspacePoint {
  Eigen::MatrixXcd basis;

  SubspacePoint() = default;
  explicit SubspacePoint(Eigen::MatrixXcd b);  // validates orthonormality to 1e-10

  int ambient_dim() const { return static_cast<int>(basis.rows()); }
  int rank() const { return static_cast<int>(basis.cols()); }
};

// Horizontal tangent vector at `base`: base^H * delta = 0.
struct TangentVector {
  Eigen::MatrixXcd delta;
  Eigen::MatrixXcd base;
};

struct SmallestEigs {
  Eigen::VectorXd values;    // m smallest eigenvalues, ascending
  Eigen::MatrixXcd vectors;  // n x m orthonormal eigenvectors
  double gap;                // lambda_{m+1} - lambda_m; +inf when m == n
  bool degenerate;           // gap within 1e-10 * spectral radius
};

// (I - phi phi^H) z
TangentVector project_tangent(const SubspacePoint& phi, const Eigen::MatrixXcd& z);

// gradient of tr(phi^H q phi) on the Grassmannian: (I - phi phi^H) q phi
TangentVector riemannian_gradient(const SubspacePoint& phi, const Eigen::MatrixXcd& q);

// Hessian action on a horizontal xi: (I - phi phi^H)(q xi - xi (phi^H q phi))
TangentVector hessian_apply(const SubspacePoint& phi, const Eigen::MatrixXcd& q,
                            const TangentVector& xi);

// thin QR of a full-column-rank x, with each R diagonal entry rotated real
// nonnegative so the result is a deterministic function of x
SubspacePoint retract_qr(const Eigen::MatrixXcd& x);

// chordal distance sqrt(m - ||a^H b||_F^2); zero iff the spans coincide
double subspace_distance(const SubspacePoint& a, const SubspacePoint& b);

// m smallest eigenpairs of a Hermitian matrix, plus the gap above them
SmallestEigs eigh_smallest(const Eigen::MatrixXcd& a, int m);

// ||a - a^H||_F <= tol * max(1, ||a||_F)
bool is_hermitian(const Eigen::MatrixXcd& a, double tol = 1e-8);

}  // namespace twotier::manifold
