#pragma once

#include <cstdint>

namespace twotier::counters {

// Per-subframe overhead of the two precoding architectures, in complex scalars.
// One-tier feeds back full instantaneous CSI every subframe; two-tier amortizes
// the statistics upload over a superframe of t_s subframes and feeds back only
// the m-dimensional effective CSI (with m = n_r * k).
struct FeedbackCounts {
  double one_tier_feedback = 0;
  double two_tier_feedback = 0;
  double one_tier_signaling = 0;
  double two_tier_signaling = 0;
};

FeedbackCounts count_feedback(int n_t, int n_r, int k, int t_s);

// MAC counts per superframe for the outer-subspace update. formula_macs is the
// closed-form estimate 16 m n_t^2; instrumented_macs is measured by running one
// compensated tracking step with the library's own counters. svd_macs is the
// cost of a full n_t x n_t eigendecomposition baseline, 21 n_t^3.
struct ComplexityCounts {
  long long formula_macs = 0;
  long long instrumented_macs = 0;
  long long svd_macs = 0;
};

ComplexityCounts count_complexity(int n_t, int m, int n_cg = 1, std::uint64_t seed = 7);

}  // namespace twotier::counters
