#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace ifsm {

/// Command-line entry point, callable in-process for tests. `args` excludes
/// the program name. Exit codes: 0 success, 1 numerical failure, 2 usage.
int run_cli(std::vector<std::string> args, std::ostream& out, std::ostream& err);

}  // namespace ifsm
