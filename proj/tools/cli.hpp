#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace iterlara::cli {

// Runs one command line (without the program name). Exit codes: 0 success,
// 1 user error (bad arguments, missing files, engine errors), 2 internal error.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);
int run_cli(int argc, char** argv);

}  // namespace iterlara::cli
