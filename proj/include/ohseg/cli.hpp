// Command-line front end. Exit codes: 0 success, 1 validation or data error,
// 2 usage error.
#pragma once

#include <ostream>
#include <string>
#include <vector>

namespace ohseg {

inline constexpr int kExitOk = 0;
inline constexpr int kExitDataError = 1;
inline constexpr int kExitUsage = 2;

/// `args` excludes the program name.
int run_cli(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace ohseg
