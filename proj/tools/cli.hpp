#pragma once

// Command-line front end: gen, solve, eval and bench subcommands.
//
// Exit codes: 0 success, 1 runtime failure, 2 usage error, 3 instance too
// large for the exact solver, 4 malformed or unreadable input.

#include <ostream>
#include <string>
#include <vector>

namespace flo::cli {

enum ExitCode : int { Ok = 0, Failure = 1, Usage = 2, TooLarge = 3, BadInput = 4 };

/// args excludes the program name. Output files are written where the flags
/// say; human-readable progress goes to err, results without --out to out.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

/// Reads key=value lines (blank lines and # comments skipped) and returns
/// them as --key=value tokens.
std::vector<std::string> config_tokens(const std::string& text, const std::string& source);

/// Worker count from FLO_WORKERS; 1 when unset. Throws on a malformed value.
unsigned workers_from_env();

}  // namespace flo::cli
