#include "twotier/manifold.hpp"

#include <cmath>
#include <limits>
#include <string>

namespace twotier::manifold {
namespace {

constexpr double kOrthoTol = 1e-10;
constexpr double kTangentTol = 1e-8;
constexpr double kRankTol = 1e-12;        // relative to the largest R diagonal
constexpr double kDegenerateTol = 1e-10;  // relative to the spectral radius

std::string shape_of(const Eigen::MatrixXcd& a) {
  return std::to_string(a.rows()) + "x" + std::to_string(a.cols());
}

void require_compatible(const SubspacePoint& phi, const Eigen::MatrixXcd& z, const char* who) {
  if (z.rows() != phi.basis.rows())
    throw DimensionError(std::string(who) + ": operand is " + shape_of(z) + ", basis is " +
                         shape_of(phi.basis));
}

void require_hermitian(const Eigen::MatrixXcd& q, const char* who) {
  if (q.rows() != q.cols())
    throw DimensionError(std::string(who) + ": matrix is " + shape_of(q) + ", expected square");
  if (!is_hermitian(q))
    throw ValidationError(std::string(who) + ": matrix is not Hermitian");
}

}  // namespace

bool is_hermitian(const Eigen::MatrixXcd& a, double tol) {
  if (a.rows() != a.cols()) return false;
  return (a - a.adjoint()).norm() <= tol * std::max(1.0, a.norm());
}

SubspacePoint::SubspacePoint(Eigen::MatrixXcd b) : basis(std::move(b)) {
  if (basis.cols() < 1 || basis.rows() < basis.cols())
    throw DimensionError("SubspacePoint: basis must be tall, got " + shape_of(basis));
  const Eigen::Index m = basis.cols();
  const double defect =
      (basis.adjoint() * basis - Eigen::MatrixXcd::Identity(m, m)).norm();
  if (defect > kOrthoTol * std::sqrt(static_cast<double>(m)))
    throw ValidationError("SubspacePoint: columns not orthonormal (defect " +
                          std::to_string(defect) + ")");
}

TangentVector project_tangent(const SubspacePoint& phi, const Eigen::MatrixXcd& z) {
  require_compatible(phi, z, "project_tangent");
  Eigen::MatrixXcd delta = z - phi.basis * (phi.basis.adjoint() * z);
  return {std::move(delta), phi.basis};
}

TangentVector riemannian_gradient(const SubspacePoint& phi, const Eigen::MatrixXcd& q) {
  require_hermitian(q, "riemannian_gradient");
  require_compatible(phi, q, "riemannian_gradient");
  const Eigen::MatrixXcd qphi = q * phi.basis;
  Eigen::MatrixXcd delta = qphi - phi.basis * (phi.basis.adjoint() * qphi);
  return {std::move(delta), phi.basis};
}

TangentVector hessian_apply(const SubspacePoint& phi, const Eigen::MatrixXcd& q,
                            const TangentVector& xi) {
  require_hermitian(q, "hessian_apply");
  require_compatible(phi, q, "hessian_apply");
  if (xi.delta.rows() != phi.basis.rows() || xi.delta.cols() != phi.basis.cols())
    throw DimensionError("hessian_apply: tangent is " + shape_of(xi.delta) + ", basis is " +
                         shape_of(phi.basis));
  const double horiz = (phi.basis.adjoint() * xi.delta).norm();
  if (horiz > kTangentTol * std::max(1.0, xi.delta.norm()))
    throw ValidationError("hessian_apply: xi is not horizontal at phi (overlap " +
                          std::to_string(horiz) + ")");
  const Eigen::MatrixXcd qphi = q * phi.basis;
  const Eigen::MatrixXcd reduced = phi.basis.adjoint() * qphi;  // phi^H q phi
  const Eigen::MatrixXcd w = q * xi.delta - xi.delta * reduced;
  Eigen::MatrixXcd delta = w - phi.basis * (phi.basis.adjoint() * w);
  return {std::move(delta), phi.basis};
}

SubspacePoint retract_qr(const Eigen::MatrixXcd& x) {
  if (x.cols() < 1 || x.rows() < x.cols())
    throw DimensionError("retract_qr: input must be tall, got " + shape_of(x));
  const Eigen::Index n = x.rows(), m = x.cols();
  Eigen::HouseholderQR<Eigen::MatrixXcd> qr(x);
  Eigen::MatrixXcd q = qr.householderQ() * Eigen::MatrixXcd::Identity(n, m);
  const Eigen::MatrixXcd r = qr.matrixQR().topRows(m).triangularView<Eigen::Upper>();

  double rmax = 0.0;
  for (Eigen::Index j = 0; j < m; ++j) rmax = std::max(rmax, std::abs(r(j, j)));
  for (Eigen::Index j = 0; j < m; ++j) {
    const double a = std::abs(r(j, j));
    if (a <= kRankTol * rmax || rmax == 0.0)
      throw SingularityError("retract_qr: column " + std::to_string(j) +
                                 " is numerically dependent on the preceding ones",
                             static_cast<int>(j));
    // rotate so that Q^H x has a real nonnegative diagonal
    q.col(j) *= r(j, j) / a;
  }
  SubspacePoint out;
  out.basis = std::move(q);
  return out;
}

double subspace_distance(const SubspacePoint& a, const SubspacePoint& b) {
  if (a.basis.rows() != b.basis.rows() || a.basis.cols() != b.basis.cols())
    throw DimensionError("subspace_distance: " + shape_of(a.basis) + " vs " + shape_of(b.basis));
  // Projector-difference form of the chordal metric: sqrt(m - |A^H B|_F^2)
  // cancels catastrophically near zero, this resolves distances down to ~n*eps.
  const Eigen::MatrixXcd diff =
      a.basis * a.basis.adjoint() - b.basis * b.basis.adjoint();
  return diff.norm() / std::sqrt(2.0);
}

SmallestEigs eigh_smallest(const Eigen::MatrixXcd& a, int m) {
  require_hermitian(a, "eigh_smallest");
  const Eigen::Index n = a.rows();
  if (m < 1 || m > n)
    throw DimensionError("eigh_smallest: m = " + std::to_string(m) + " out of range for " +
                         shape_of(a));
  Eigen::SelfAdjointEigenSolver<Eigen::MatrixXcd> es((a + a.adjoint()) / 2.0);
  if (es.info() != Eigen::Success)
    throw SingularityError("eigh_smallest: eigensolver did not converge", -1);

  SmallestEigs out;
  out.values = es.eigenvalues().head(m);
  out.vectors = es.eigenvectors().leftCols(m);
  const double radius = std::max(std::abs(es.eigenvalues()(0)), std::abs(es.eigenvalues()(n - 1)));
  out.gap = (m < n) ? es.eigenvalues()(m) - es.eigenvalues()(m - 1)
                    : std::numeric_limits<double>::infinity();
  out.degenerate = (m < n) && out.gap <= kDegenerateTol * radius;
  return out;
}

}  // namespace twotier::manifold
