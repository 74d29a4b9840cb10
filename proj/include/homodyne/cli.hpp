#pragma once

#include <iosfwd>
#include <string>
#include <vector>

namespace homodyne::cli {

// Exit codes: 0 success, 2 usage or bad input, 3 I/O or integrity failure,
// 4 fit did not converge.
inline constexpr int exit_ok = 0;
inline constexpr int exit_usage = 2;
inline constexpr int exit_io = 3;
inline constexpr int exit_no_convergence = 4;

// Environment variable naming the preset directory.
inline constexpr const char* preset_dir_env = "HOMODYNE_PRESET_DIR";

// args excludes the program name.
int run(const std::vector<std::string>& args, std::ostream& out, std::ostream& err);

}  // namespace homodyne::cli
