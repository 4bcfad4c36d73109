#pragma once

#include <ostream>

namespace mfeit {

/// Exit codes of the command-line harness.
enum ExitCode : int { exit_ok = 0, exit_failure = 1, exit_config = 2, exit_numeric = 3, exit_missing_input = 4 };

/// mfeit <spectrum|forward|synth|extract|invert|sweep> --config <path> --out <dir> [--threads N]
int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

} // namespace mfeit
