#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace pilu::cli {

inline constexpr int kExitOk = 0;
inline constexpr int kExitFailure = 1;
inline constexpr int kExitUsage = 2;

/// Environment variable consulted when --data-dir is not given.
inline constexpr const char* kDataDirEnv = "PILU_DATA_DIR";

/// Runs the `pilu` command line. args[0] is the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace pilu::cli
