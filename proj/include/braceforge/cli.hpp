#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace braceforge {

/// Runs the command-line front end. Exit code 0: all checks passed;
/// 1: a check failed (witness printed); 2: usage or parse error.
/// Identical configurations (including --seed) produce byte-identical
/// machine-format output.
int run_cli(const std::vector<std::string>& args, std::ostream& out,
            std::ostream& err);

}  // namespace braceforge
