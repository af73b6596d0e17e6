#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace tsturm {

/// Command-line front end. Subcommands: forward, spectrum, extract, invert,
/// verify, oracle. Exit status: 0 success, 1 validation error, 2 numerical
/// failure, 3 non-convergence (invert only; the report is still written).
int run_cli(std::vector<std::string> args, std::ostream& out,
            std::ostream& err);

} // namespace tsturm
