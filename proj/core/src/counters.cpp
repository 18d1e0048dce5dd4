#include "twotier/counters.hpp"

#include <Eigen/Dense>

#include "synth.hpp"
#include "twotier/errors.hpp"
#include "twotier/random.hpp"
#include "twotier/tracker.hpp"

namespace twotier::counters {

FeedbackCounts count_feedback(int n_t, int n_r, int k, int t_s) {
  if (n_t < 1 || n_r < 1 || k < 1 || t_s < 1)
    throw ValidationError("count_feedback: all arguments must be positive");
  FeedbackCounts out;
  const double nt = n_t, nr = n_r, kk = k, ts = t_s;
  out.one_tier_feedback = nt * nr * kk;
  out.two_tier_feedback = nt * nt / ts + nr * kk * kk;
  out.one_tier_signaling = 3.0 * nt * nr * kk;
  out.two_tier_signaling = 3.0 * nt * nt / ts;
  return out;
}

ComplexityCounts count_complexity(int n_t, int m, int n_cg, std::uint64_t seed) {
  if (n_t < 1 || m < 1 || m > n_t || n_cg < 1)
    throw ValidationError("count_complexity: need 1 <= m <= n_t and n_cg >= 1");
  ComplexityCounts out;
  out.formula_macs = 16LL * m * n_t * n_t;
  out.svd_macs = 21LL * n_t * n_t * n_t;

  // Measure one compensated superframe on a synthetic slowly drifting objective.
  Rng rng(seed);
  const Eigen::MatrixXcd q0 = synth::gapped_hermitian(rng, n_t, m);
  const Eigen::MatrixXcd q1 = q0 + 1e-2 * synth::random_hermitian(rng, n_t);
  track::TrackerState st(track::oracle_outer(q0, m), q0, track::GammaPolicy::spectral(), n_cg,
                         seed);
  const track::StepInfo info = track_superframe(st, q1, track::TrackMode::compensated);
  out.instrumented_macs = info.macs;
  return out;
}

}  // namespace twotier::counters
