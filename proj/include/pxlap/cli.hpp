#pragma once

#include <iosfwd>

namespace pxlap {

enum ExitCode : int {
  kExitOk = 0,
  kExitConfig = 2,
  kExitSolver = 3,
  kExitHypothesis = 4,
};

/// Entry point of the pxlap command line tool. Subcommands: solve, fiber,
/// scan-lambda, norm, verify, oracle. Errors are written to `err` as one JSON object.
int run(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace pxlap
