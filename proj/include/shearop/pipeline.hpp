#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace shearop {

enum ExitCode : int {
    exit_ok = 0,
    exit_failure = 1,
    exit_config = 2,
    exit_missing_input = 3,
    exit_numerical = 4,
};

/// Entry point of the `shearop` tool. `args` excludes the program name.
/// Subcommands: generate, train, evaluate, compare, inspect-frame.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace shearop
