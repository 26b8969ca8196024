#pragma once

#include <string>
#include <vector>

namespace jumpsyn {

// Dispatches the command line (excluding the program name). Exit codes:
// 0 success, 1 usage or input error, 2 infeasible synthesis.
int run_cli(const std::vector<std::string>& args);

} // namespace jumpsyn
