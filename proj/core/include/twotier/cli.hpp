#pragma once

#include <iosfwd>

namespace twotier::harness {

// Command-line driver. Subcommands: run, sweep, check, counters.
// Exit codes: 0 success, 1 usage error, 2 config error, 3 numerical failure.
int cli_main(int argc, const char* const* argv, std::ostream& out, std::ostream& err);
int cli_main(int argc, const char* const* argv);  // stdout/stderr

}  // namespace twotier::harness
