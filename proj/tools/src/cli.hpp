#pragma once

#include <ostream>

namespace ionmodes::cli {

// Exit codes: 0 success, 2 configuration or usage error, 3 numerical failure.
inline constexpr int kExitConfig = 2;
inline constexpr int kExitNumerical = 3;

int run_cli(int argc, const char* const* argv, std::ostream& out, std::ostream& err);

}  // namespace ionmodes::cli
