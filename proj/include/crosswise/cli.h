#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace crosswise {

// Exit codes.
inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;
inline constexpr int kExitNumeric = 3;

// Runs the xws command line. `args` excludes the program name. `in` feeds
// `segment` when no input file is given.
int run_cli(const std::vector<std::string>& args, std::istream& in, std::ostream& out, std::ostream& err);

}  // namespace crosswise
