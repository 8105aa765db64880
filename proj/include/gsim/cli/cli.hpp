#pragma once

#include <string>
#include <vector>

namespace gsim::cli {

inline constexpr const char* kVersion = "graphsim 0.1.0";

/// Runs one subcommand (validate, simulate, collect, train, eval, bench).
/// Exit codes: 0 success, 1 usage error, 2 validation/input error,
/// 3 runtime error. A JSON manifest recording the full flag set and seed is
/// written beside every output file.
int dispatch(const std::vector<std::string>& args);

} // namespace gsim::cli
