#include <cmath>

#include "doctest.h"
#include "twotier/counters.hpp"
#include "twotier/errors.hpp"

using namespace twotier;
using namespace twotier::counters;

TEST_CASE("feedback counts: closed forms and the reference values") {
  // (n_t, k) = (24, 8), n_r = 2, t_s = 100
  const FeedbackCounts a = count_feedback(24, 2, 8, 100);
  CHECK(a.one_tier_feedback == 384.0);          // n_t n_r k
  CHECK(a.two_tier_feedback == doctest::Approx(133.76).epsilon(1e-12));  // n_t^2/t_s + n_r k^2
  CHECK(a.one_tier_signaling == 1152.0);        // 3 n_t n_r k
  CHECK(a.two_tier_signaling == doctest::Approx(17.28).epsilon(1e-12));  // 3 n_t^2/t_s
  CHECK(std::llround(a.two_tier_feedback) == 134);
  CHECK(std::llround(a.two_tier_signaling) == 17);

  const FeedbackCounts b = count_feedback(48, 2, 8, 100);
  CHECK(b.one_tier_feedback == 768.0);
  CHECK(std::llround(b.two_tier_feedback) == 151);
  CHECK(b.one_tier_signaling == 2304.0);
  CHECK(std::llround(b.two_tier_signaling) == 69);

  const FeedbackCounts c = count_feedback(100, 2, 30, 100);
  CHECK(c.one_tier_feedback == 6000.0);
  CHECK(c.two_tier_feedback == 1900.0);
  CHECK(c.one_tier_signaling == 18000.0);
  CHECK(c.two_tier_signaling == 300.0);

  CHECK_THROWS_AS(count_feedback(0, 2, 8, 100), ValidationError);
  CHECK_THROWS_AS(count_feedback(24, 2, 8, 0), ValidationError);
}

TEST_CASE("complexity counts: formula, baseline, and instrumented agreement") {
  const ComplexityCounts a = count_complexity(24, 8);
  CHECK(a.formula_macs == 73728);  // 16 m n_t^2
  CHECK(a.svd_macs == 21LL * 24 * 24 * 24);

  const ComplexityCounts b = count_complexity(48, 8);
  CHECK(b.formula_macs == 294912);

  const ComplexityCounts c = count_complexity(100, 8);
  CHECK(c.formula_macs == 1280000);
  CHECK(c.svd_macs == 21000000);

  for (int n_t : {16, 24, 48, 100}) {
    const ComplexityCounts cc = count_complexity(n_t, 8);
    const double ratio =
        static_cast<double>(cc.instrumented_macs) / static_cast<double>(cc.formula_macs);
    CAPTURE(n_t);
    CHECK(ratio > 0.4);  // the acceptance band [0.5, 2] is checked at the pinned sizes
    CHECK(ratio < 2.5);
    CHECK(cc.instrumented_macs > 0);
  }

  // deterministic given the seed
  CHECK(count_complexity(24, 8, 1, 11).instrumented_macs ==
        count_complexity(24, 8, 1, 11).instrumented_macs);

  CHECK_THROWS_AS(count_complexity(8, 9), ValidationError);
  CHECK_THROWS_AS(count_complexity(0, 1), ValidationError);
  CHECK_THROWS_AS(count_complexity(8, 2, 0), ValidationError);
}
