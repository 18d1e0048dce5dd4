#pragma once

#include <Eigen/Dense>
#include <functional>

#include "twotier/manifold.hpp"
#include "twotier/random.hpp"

namespace twotier::track {

// Multiply-accumulate ledger. Every arithmetic-bearing step of the tracker
// reports here with its true operand sizes; diagnostics (oracle comparisons,
// error norms) stay off the books.
struct MacCount {
  long long value = 0;

  void gemm(int p, int q, int r) { value += 1LL * p * q * r; }
  void scale(int p, int q) { value += 1LL * p * q; }
  void eig(int m) { value += 9LL * m * m * m; }        // dense Hermitian eigensolve
  void qr(int n, int m) { value += 2LL * n * m * m; }  // thin Householder QR
};

struct GammaPolicy {
  enum class Kind { fixed, spectral };
  Kind kind = Kind::spectral;
  double value = 0.5;  // step size when fixed; safety factor over 1/rho(q) when spectral

  static GammaPolicy fixed(double step);
  static GammaPolicy spectral(double safety = 0.5);
};

struct CgResult {
  Eigen::VectorXcd x;
  double residual_norm = 0.0;  // ||b - a x|| at exit
  int iterations = 0;
  bool no_progress = false;  // operator annihilates the data; x stays zero
};

using LinearOp = std::function<Eigen::VectorXcd(const Eigen::VectorXcd&)>;

// Conjugate gradient on the normal equations a^H a x = a^H b, started at zero.
// Minimizes ||b - a x|| over the growing Krylov space, so the residual norm is
// nonincreasing in the iteration count and the least-squares solution is
// reached at full depth.
CgResult cg_solve(const LinearOp& apply, const LinearOp& adjoint_apply,
                  const Eigen::VectorXcd& b, int n_iter);

// largest |eigenvalue| of a Hermitian matrix via a seeded power method
double spectral_radius_estimate(const Eigen::MatrixXcd& q, Rng& rng, int iters, MacCount& macs);

// smallest-eigenspace baseline: the subspace a full eigensolve would pick
manifold::SubspacePoint oracle_outer(const Eigen::MatrixXcd& q, int m);

// one projected descent step: retract(phi - gamma * q * phi)
manifold::SubspacePoint gradient_step(const manifold::SubspacePoint& phi,
                                      const Eigen::MatrixXcd& q, double gamma, MacCount& macs);

struct CompensationOutcome {
  Eigen::MatrixXcd phi_one;        // compensated basis, not yet re-orthonormalized
  double compensation_norm = 0.0;  // Frobenius norm of the applied correction
  double gradient_norm = 0.0;      // ||(I - phi phi^H) q_now phi|| at the base point
  double cg_residual_max = 0.0;    // worst per-column least-squares residual
  bool degenerate = false;         // some column saw a vanishing operator
};

// First-order subspace correction for the statistics update q_prev -> q_now.
// The gradient change is pushed through the inverse Hessian one eigendirection
// of phi^H q_now phi at a time; each column solve runs n_cg conjugate-gradient
// iterations on the normal equations.
CompensationOutcome compensation_step(const manifold::SubspacePoint& phi,
                                      const Eigen::MatrixXcd& q_prev,
                                      const Eigen::MatrixXcd& q_now, int n_cg, MacCount& macs);

enum class TrackMode { compensated, gradient_only };

struct TrackerState {
  manifold::SubspacePoint phi;
  Eigen::MatrixXcd q_prev;
  GammaPolicy gamma = GammaPolicy::spectral();
  int n_cg = 1;
  int superframe = 0;
  Rng rng{0};  // drives the power-method start vectors
  MacCount macs;

  TrackerState() = default;
  TrackerState(manifold::SubspacePoint phi0, Eigen::MatrixXcd q0, GammaPolicy g, int n_cg,
               uint64_t seed);
};

struct StepInfo {
  double gradient_norm = 0.0;      // ||(I - phi phi^H) q_now phi|| before the step
  double compensation_norm = 0.0;  // zero in gradient_only mode
  double gamma = 0.0;
  bool degenerate = false;
  long long macs = 0;  // cost of this step alone
};

// Advance the tracked subspace by one statistics update. Compensated mode runs
// the correction before the descent step; gradient_only skips it. q_prev is
// replaced by q_now on exit.
StepInfo track_superframe(TrackerState& st, const Eigen::MatrixXcd& q_now, TrackMode mode);

}  // namespace twotier::track
