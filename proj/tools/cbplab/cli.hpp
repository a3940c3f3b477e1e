#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cbp::cli {

/// Exit codes: 0 success, 2 usage or validation error, 1 runtime error.
inline constexpr int kExitOk = 0;
inline constexpr int kExitRuntime = 1;
inline constexpr int kExitUsage = 2;

/// `args` excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

int run(int argc, char** argv);

}  // namespace cbp::cli
