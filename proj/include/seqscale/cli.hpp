#pragma once

// ============================================================================
// Command-line front end.
//
// Subcommands: run, vote, simulate, report, replay-verify.  Every invocation
// writes a config snapshot next to its outputs.  Exit codes are stable:
//   0 — success
//   1 — usage, config/schema, or verification errors (diagnostics on stderr)
//   2 — run completed with partial failures (failed cells listed on stderr)
//
// Mock and replay runs use a virtual clock, so their records and reports are
// deterministic; live HTTP runs use the system clock.
// ============================================================================

#include <iosfwd>
#include <string>
#include <vector>

namespace seqscale::cli {

inline constexpr int kExitSuccess = 0;
inline constexpr int kExitError = 1;
inline constexpr int kExitPartialFailure = 2;

/** Runs the CLI on `args` (argv without the program name). */
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace seqscale::cli
