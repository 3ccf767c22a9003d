// Command-line front end: eval, verify, oracle and list.

#ifndef QSERIES_CLI_HPP
#define QSERIES_CLI_HPP

#include <iosfwd>

namespace qseries {

/// Process exit codes.
enum ExitCode : int {
  kExitPass = 0,
  kExitFail = 1,
  kExitInconclusive = 2,
  kExitDomain = 3,
  kExitUsage = 64,
};

/// Runs the tool with the given arguments (argv[0] is the program name).
/// Reports go to `out` unless --out names a file; messages go to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace qseries

#endif  // QSERIES_CLI_HPP
