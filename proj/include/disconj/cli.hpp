#pragma once

// Command-line front end. The binary in tools/ is a thin wrapper so the whole
// dispatch can be exercised from tests.

#include <iosfwd>
#include <string>
#include <vector>

namespace disconj {

namespace exit_code {
inline constexpr int ok = 0;
/// A soundness violation, or a failed catalog fact.
inline constexpr int violation = 1;
/// `criteria`: no criterion decided anything.
inline constexpr int inconclusive = 2;
/// Bad flags, unreadable request file, malformed expression.
inline constexpr int usage = 64;
/// Numerical failure, unmet precondition, domain error.
inline constexpr int numerical = 65;
}  // namespace exit_code

/// Runs one command. `args` excludes the program name. Reports go to `out`
/// unless --output names a file; diagnostics go to `err`.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace disconj
