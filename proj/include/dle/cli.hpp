// cli.hpp — the dle command-line front end, exposed as a library call so the
// whole surface (parsing, reports, exit codes) is testable in-process.

#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace dle {

enum ExitCode : int {
    kExitOk = 0,
    kExitValidation = 2,  // schema or validation error
    kExitConstraint = 3,  // state rejected by a pre-constraint
    kExitCheckFailed = 4, // invariant suite reported a failure
};

// args excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace dle
