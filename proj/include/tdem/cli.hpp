#pragma once

#include <iostream>

namespace tdem {

/// Exit codes of the command-line tool.
enum ExitCode : int {
  kExitOk = 0,
  kExitIo = 1,
  kExitValidation = 2,
  kExitNotConverged = 3,
};

/// Entry point of the `tdem` tool: make-torus, tdem, parameterize, metrics.
/// Summaries go to `out` as one JSON object per line, diagnostics to `err`.
int run_cli(int argc, const char* const* argv, std::ostream& out = std::cout,
            std::ostream& err = std::cerr);

}  // namespace tdem
