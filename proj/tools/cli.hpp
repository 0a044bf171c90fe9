#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace nqkv::tools {

inline constexpr int kExitOk = 0;
inline constexpr int kExitConfig = 2;
inline constexpr int kExitData = 3;

// Runs the nqkv command line. Machine output goes to `out` as JSON (or a
// human table with --pretty); diagnostics go to `err`.
int run_cli(int argc, char** argv, std::ostream& out, std::ostream& err);
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace nqkv::tools
