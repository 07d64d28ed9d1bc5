#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace szego::cli {

// Runs `szego_lab <args...>` (args excludes the program name). Exit codes:
// 0 success, 1 invalid input or configuration, 2 numerical failure.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace szego::cli
