#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace cgec {

inline constexpr int kExitOk = 0;
inline constexpr int kExitUsage = 1;
inline constexpr int kExitData = 2;

/// Entry point for `cgec-eval`. args[0] is the program name. Subcommands:
/// evaluate, correlate, validate.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace cgec
