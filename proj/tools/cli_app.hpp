#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace adsvd::cli {

/// Parses `args` (without the program name) and runs the chosen
/// subcommand. Returns the process exit status.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace adsvd::cli
