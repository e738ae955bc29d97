#pragma once
// Command-line front end. Subcommands: solve, adaptive, check, ggm, simulate.

#include <iosfwd>
#include <string>
#include <vector>

namespace adalasso::cli {

enum ExitCode : int
{
    ok = 0,
    runtime_failure = 1,
    config_error = 2,
    too_many_failures = 3,
};

/// args excludes the program name. JSON goes to `out`, diagnostics to `err`.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

} // namespace adalasso::cli
