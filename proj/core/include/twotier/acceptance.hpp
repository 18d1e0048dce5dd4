#pragma once

#include <iosfwd>

namespace twotier::harness {

// Runs the full acceptance suite, printing one "PASS"/"FAIL" line per
// criterion to `out`. Returns the number of failed criteria.
int run_acceptance(std::ostream& out);

}  // namespace twotier::harness
