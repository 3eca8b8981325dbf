#pragma once

#include <string>
#include <vector>

namespace threadlab {

// argv-style arguments, program name excluded. Returns the process exit
// code: 0 success (including --help), 2 usage error, 1 runtime failure.
int run_cli(const std::vector<std::string>& args);

}  // namespace threadlab
